"""Complex array primitives used by every other module.

Vectors and matrices are plain numpy arrays of dtype complex128; the
helpers here validate shapes and finiteness at public boundaries.  The
module provides the normalized (unitary) DFT, its low-frequency partial
version, circular convolution, circularly-symmetric complex Gaussian
sampling, and a reproducible keyed random stream.

The DFT is implemented twice behind the same contract: a direct matrix
product (the reference every test runs against) and an FFT-backed fast
path with identical scaling.
"""

from __future__ import annotations

import hashlib

import numpy as np

from .errors import DimensionError

_MASK64 = (1 << 64) - 1


class SeededRng:
    """Reproducible random stream keyed by (seed, stream id).

    Wraps a counter-based Philox generator, so streams with distinct
    (seed, stream) keys are statistically independent and the draw
    sequence depends only on the key and the call order, never on any
    global state.  Instances are single-owner: code that needs an
    independent source must create its own child via :meth:`derive`.
    """

    def __init__(self, seed: int, stream: int = 0):
        self.seed = int(seed) & _MASK64
        self.stream = int(stream) & _MASK64
        key = np.array([self.seed, self.stream], dtype=np.uint64)
        self.gen = np.random.Generator(np.random.Philox(key=key))

    def derive(self, *parts: int | float | str) -> "SeededRng":
        """Return an independent child stream keyed by this stream plus `parts`.

        The mapping is a stable hash of (seed, stream, parts), so derivation
        is order-independent across runs and platforms.  Parts may be ints,
        floats, or strings; floats are keyed by their shortest round-trip
        repr.
        """
        h = hashlib.blake2b(digest_size=8)
        h.update(self.seed.to_bytes(8, "little"))
        h.update(self.stream.to_bytes(8, "little"))
        for part in parts:
            if not isinstance(part, (int, float, str)):
                raise TypeError(f"cannot derive a stream from {type(part).__name__}")
            h.update(f"{type(part).__name__}:{part!r};".encode())
        return SeededRng(self.seed, int.from_bytes(h.digest(), "little"))

    def __repr__(self) -> str:
        return f"SeededRng(seed={self.seed}, stream={self.stream})"


def as_vector(v, name: str = "vector") -> np.ndarray:
    """Coerce to a finite, nonempty 1-d complex128 array."""
    arr = np.asarray(v, dtype=np.complex128)
    if arr.ndim != 1:
        raise DimensionError(f"{name} must be 1-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise DimensionError(f"{name} must be nonempty")
    if not np.all(np.isfinite(arr)):
        raise DimensionError(f"{name} contains non-finite entries")
    return arr


def as_real_vector(v, name: str = "vector") -> np.ndarray:
    """Coerce to a finite, nonempty 1-d float64 array."""
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1:
        raise DimensionError(f"{name} must be 1-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise DimensionError(f"{name} must be nonempty")
    if not np.all(np.isfinite(arr)):
        raise DimensionError(f"{name} contains non-finite entries")
    return arr


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite, nonempty 2-d complex128 array."""
    arr = np.asarray(a, dtype=np.complex128)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise DimensionError(f"{name} must be nonempty")
    if not np.all(np.isfinite(arr)):
        raise DimensionError(f"{name} contains non-finite entries")
    return arr


def hermitian_inner(u, v) -> complex:
    """Conjugate-linear inner product sum_i conj(u[i]) * v[i]."""
    u = as_vector(u, "u")
    v = as_vector(v, "v")
    if u.shape != v.shape:
        raise DimensionError(f"length mismatch: {u.size} vs {v.size}")
    return complex(np.vdot(u, v))


def matvec(a, v) -> np.ndarray:
    """Matrix-vector product with shape checking."""
    a = as_matrix(a, "a")
    v = as_vector(v, "v")
    if a.shape[1] != v.size:
        raise DimensionError(f"matrix has {a.shape[1]} columns but vector has length {v.size}")
    return a @ v


def dft_matrix(n: int) -> np.ndarray:
    """The n-point unitary DFT matrix F with F[a, b] = exp(-2j*pi*a*b/n) / sqrt(n)."""
    if n < 1:
        raise DimensionError(f"n must be positive, got {n}")
    idx = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(idx, idx) / n) / np.sqrt(n)


def partial_dft_matrix(n: int, m: int) -> np.ndarray:
    """The first m (low-frequency) rows of the n-point unitary DFT matrix."""
    if not 1 <= m <= n:
        raise DimensionError(f"need 1 <= m <= n, got m={m}, n={n}")
    return dft_matrix(n)[:m]


def dft(v, fast: bool = False) -> np.ndarray:
    """Unitary discrete Fourier transform.

    The reference path is the explicit O(n^2) matrix product; `fast=True`
    switches to the FFT with identical normalization.  Both satisfy
    ||dft(v)|| == ||v||.
    """
    v = as_vector(v, "v")
    if fast:
        return np.fft.fft(v) / np.sqrt(v.size)
    return dft_matrix(v.size) @ v


def partial_dft(v, m: int, fast: bool = False) -> np.ndarray:
    """First m entries of dft(v): the low-frequency band of a length-n signal.

    m == n is allowed and reduces to the full transform; m > n is an error.
    """
    v = as_vector(v, "v")
    if m > v.size:
        raise DimensionError(f"m={m} exceeds signal length {v.size}")
    if m < 1:
        raise DimensionError(f"m must be positive, got {m}")
    return dft(v, fast=fast)[:m]


def circular_convolve(x, h) -> np.ndarray:
    """Circular convolution: result[t] = sum_tau x[tau] * h[(t - tau) mod n]."""
    x = as_vector(x, "x")
    h = as_vector(h, "h")
    if x.size != h.size:
        raise DimensionError(f"length mismatch: {x.size} vs {h.size}")
    n = x.size
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    return (h[idx] * x[None, :]).sum(axis=1)


def sample_complex_gaussian(rng: SeededRng, length: int) -> np.ndarray:
    """Draw length i.i.d. CN(0, 1) entries.

    Real and imaginary parts are independent N(0, 1/2), so E|w|^2 == 1.
    """
    if length < 1:
        raise DimensionError(f"length must be positive, got {length}")
    re = rng.gen.standard_normal(length)
    im = rng.gen.standard_normal(length)
    return (re + 1j * im) * np.sqrt(0.5)


def sample_complex_gaussian_matrix(rng: SeededRng, rows: int, cols: int) -> np.ndarray:
    """Draw a rows-by-cols matrix of i.i.d. CN(0, 1) entries."""
    if rows < 1 or cols < 1:
        raise DimensionError(f"shape must be positive, got ({rows}, {cols})")
    re = rng.gen.standard_normal((rows, cols))
    im = rng.gen.standard_normal((rows, cols))
    return (re + 1j * im) * np.sqrt(0.5)
