"""Spectral initialization from intensity-weighted correlation matrices.

For each side of the bilinear product, the intensity-weighted sample
correlation of the sensing rows,

    H = (1/m) * sum_l y[l] * a_l a_l^H,

concentrates around a matrix whose leading eigenvector is aligned with
the true coefficient vector: on the kernel side the expectation is
||z||^2 (||g||^2 I + g g^H), and on the signal side ||z||^2 I + z z^H
when g is unit norm.  The leading eigenvalue of the signal-side matrix
approaches 2 ||z||^2, so sqrt(lambda/2) recovers the energy scale that
intensity measurements would otherwise leave undetermined.

Eigenpairs are extracted by plain power iteration with a random complex
Gaussian start vector.  The iteration count is fixed (default 150) with
no early exit, matching the benchmark protocol; an optional convergence
tolerance is available but off by default.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .core import SeededRng, as_matrix, as_real_vector, sample_complex_gaussian
from .errors import DegenerateSpectrumError, DimensionError

DEFAULT_POWER_ITERS = 150


@dataclass(frozen=True)
class CorrelationMatrix:
    """A Hermitian data-weighted correlation matrix and its provenance."""

    matrix: np.ndarray
    d: int
    side: str | None = None  # "g-side", "z-side", or None

    def __post_init__(self):
        object.__setattr__(self, "matrix", as_matrix(self.matrix, "correlation matrix"))
        if self.matrix.shape != (self.d, self.d):
            raise DimensionError(
                f"correlation matrix has shape {self.matrix.shape}, expected ({self.d}, {self.d})"
            )


@dataclass(frozen=True)
class EigenEstimate:
    """A leading eigenpair estimate from power iteration."""

    eigenvalue: float
    eigenvector: np.ndarray
    iterations_used: int
    rayleigh_trace: tuple[float, ...] | None = None


class InitEstimate(NamedTuple):
    g0: np.ndarray
    z0: np.ndarray
    lambda_z: float


def build_correlation(y, rows, side: str | None = None) -> CorrelationMatrix:
    """Accumulate H = (1/m) sum_l y[l] * a_l a_l^H from the rows a_l^H.

    The l-th row of `rows` is a_l^H, so in matrix form
    H = rows^H diag(y) rows / m.  The result is symmetrized as
    (H + H^H)/2 to suppress floating-point drift; with nonnegative y it
    is positive semidefinite.
    """
    y = as_real_vector(y, "y")
    rows = as_matrix(rows, "rows")
    if rows.shape[0] != y.size:
        raise DimensionError(f"y has length {y.size} but rows has {rows.shape[0]} rows")
    h = rows.conj().T @ (y[:, None] * rows) / y.size
    h = (h + h.conj().T) / 2.0
    return CorrelationMatrix(matrix=h, d=rows.shape[1], side=side)


def power_iteration(
    corr: CorrelationMatrix,
    iters: int,
    rng: SeededRng,
    start: np.ndarray | None = None,
    tol: float | None = None,
    record_trace: bool = False,
) -> EigenEstimate:
    """Estimate the leading eigenpair by multiply-and-normalize rounds.

    Args:
        corr: Hermitian matrix to analyze.
        iters: number of rounds; always run in full unless `tol` is set.
        rng: source for the random complex Gaussian start vector.
        start: optional explicit start vector (normalized internally).
        tol: optional early-exit threshold on |1 - |<w_t, w_{t+1}>||.
        record_trace: record the Rayleigh quotient after every round.

    Returns:
        EigenEstimate with a unit-norm eigenvector and the real Rayleigh
        quotient w^H H w as the eigenvalue.
    """
    if iters < 1:
        raise DimensionError(f"iters must be positive, got {iters}")
    h = corr.matrix
    if not h.any():
        raise DegenerateSpectrumError("correlation matrix is zero; eigenvector undefined")
    if start is None:
        w = sample_complex_gaussian(rng, corr.d)
    else:
        w = np.asarray(start, dtype=np.complex128)
        if w.shape != (corr.d,):
            raise DimensionError(f"start vector has shape {w.shape}, expected ({corr.d},)")
    norm = np.linalg.norm(w)
    if norm == 0.0:
        raise DegenerateSpectrumError("start vector has zero norm")
    w = w / norm
    trace: list[float] = []
    used = 0
    for _ in range(iters):
        hw = h @ w
        norm = np.linalg.norm(hw)
        if norm == 0.0:
            raise DegenerateSpectrumError("iterate fell into the null space of the matrix")
        w_next = hw / norm
        used += 1
        if record_trace:
            trace.append(float(np.real(np.vdot(w_next, h @ w_next))))
        converged = tol is not None and abs(1.0 - abs(np.vdot(w, w_next))) <= tol
        w = w_next
        if converged:
            break
    eigenvalue = float(np.real(np.vdot(w, h @ w)))
    return EigenEstimate(
        eigenvalue=eigenvalue,
        eigenvector=w,
        iterations_used=used,
        rayleigh_trace=tuple(trace) if record_trace else None,
    )


def initialize(
    y, bhat, chat, iters: int = DEFAULT_POWER_ITERS, rng: SeededRng | None = None
) -> InitEstimate:
    """Spectral starting point for the refinement stage.

    Builds both correlation matrices, extracts their leading eigenpairs,
    and returns g0 = w_g (unit norm), z0 = sqrt(max(lambda_z, 0)/2) * w_z,
    and lambda_z itself.  lambda_z can be negative when heavy noise makes
    the signal-side matrix indefinite; the scale is then clamped to zero,
    leaving z0 = 0 as the degenerate start.
    """
    if rng is None:
        rng = SeededRng(0)
    hg = build_correlation(y, bhat, side="g-side")
    hz = build_correlation(y, chat, side="z-side")
    eig_g = power_iteration(hg, iters, rng)
    eig_z = power_iteration(hz, iters, rng)
    scale = math.sqrt(max(eig_z.eigenvalue, 0.0) / 2.0)
    return InitEstimate(
        g0=eig_g.eigenvector, z0=scale * eig_z.eigenvector, lambda_z=eig_z.eigenvalue
    )
