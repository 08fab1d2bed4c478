"""Problem synthesis and the phaseless measurement pipeline.

A problem instance carries the two sensing matrices that map the unknown
low-dimensional coefficient vectors g (kernel side, length k) and z
(signal side, length s) to m intensity measurements

    y[l] = |(row_l of Bhat) g|^2 * |(row_l of Chat) z|^2 + noise[l].

Two synthesis modes are supported.  `direct-gaussian` draws Bhat and Chat
with i.i.d. CN(0, 1) entries, which is the model every experiment sweep
uses.  `convolutional` draws full-resolution subspace matrices B (n x k)
and C (n x s) and sets Bhat = F_lo B, Chat = F_lo C with F_lo the first m
rows of the unitary n-point DFT; this mode exists to validate that the
physical-domain operator

    |partial_dft(circular_convolve(C z, B g), m)|^2

equals n times the per-entry form above (the factor n comes from the
unitary DFT normalization of the convolution identity).  Measurements are
always synthesized with the per-entry form, so recovered coefficients are
directly comparable to the stored ground truth in either mode.

Instances round-trip through a JSON file format documented in
`save_instance`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .core import (
    SeededRng,
    as_matrix,
    as_real_vector,
    as_vector,
    circular_convolve,
    partial_dft,
    partial_dft_matrix,
    sample_complex_gaussian,
    sample_complex_gaussian_matrix,
)
from .errors import ConfigError, DegenerateInputError, DimensionError, InstanceFormatError
from .metrics import snr_db

MODES = ("direct-gaussian", "convolutional", "external")

_UNIT_NORM_TOL = 1e-10
_CONSISTENCY_TOL = 1e-10


@dataclass(frozen=True)
class ProblemInstance:
    """Subspace matrices, dimensions, and optional ground truth.

    Attributes:
        n: full-resolution signal length (nominal in direct-gaussian mode).
        k, s: kernel-side and signal-side coefficient dimensions.
        m: number of measurements.
        mode: one of `direct-gaussian`, `convolutional`, `external`.
        bhat, chat: (m, k) and (m, s) sensing matrices.
        b, c: optional (n, k) and (n, s) full-resolution subspace matrices.
        g_true, z_true: optional ground-truth coefficients; g_true is unit norm.
    """

    n: int
    k: int
    s: int
    m: int
    mode: str
    bhat: np.ndarray
    chat: np.ndarray
    b: np.ndarray | None = None
    c: np.ndarray | None = None
    g_true: np.ndarray | None = None
    z_true: np.ndarray | None = None

    def __post_init__(self):
        for name in ("n", "k", "s", "m"):
            if getattr(self, name) < 1:
                raise DimensionError(f"{name} must be positive, got {getattr(self, name)}")
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if self.mode == "convolutional" and not self.m < self.n:
            raise DimensionError(
                f"convolutional mode requires m < n, got m={self.m}, n={self.n}"
            )
        object.__setattr__(self, "bhat", as_matrix(self.bhat, "Bhat"))
        object.__setattr__(self, "chat", as_matrix(self.chat, "Chat"))
        _expect_shape(self.bhat, (self.m, self.k), "Bhat")
        _expect_shape(self.chat, (self.m, self.s), "Chat")
        if self.b is not None:
            object.__setattr__(self, "b", as_matrix(self.b, "B"))
            _expect_shape(self.b, (self.n, self.k), "B")
        if self.c is not None:
            object.__setattr__(self, "c", as_matrix(self.c, "C"))
            _expect_shape(self.c, (self.n, self.s), "C")
        if self.g_true is not None:
            object.__setattr__(self, "g_true", as_vector(self.g_true, "g_true"))
            if self.g_true.size != self.k:
                raise DimensionError(f"g_true has length {self.g_true.size}, expected k={self.k}")
            if abs(np.linalg.norm(self.g_true) - 1.0) > _UNIT_NORM_TOL:
                raise DimensionError("g_true must be unit norm")
        if self.z_true is not None:
            object.__setattr__(self, "z_true", as_vector(self.z_true, "z_true"))
            if self.z_true.size != self.s:
                raise DimensionError(f"z_true has length {self.z_true.size}, expected s={self.s}")
        if self.mode == "convolutional" and self.b is not None:
            flo = partial_dft_matrix(self.n, self.m)
            if not np.allclose(self.bhat, flo @ self.b, atol=_CONSISTENCY_TOL, rtol=0):
                raise DimensionError("Bhat is not the low-frequency transform of B")
            if self.c is not None and not np.allclose(
                self.chat, flo @ self.c, atol=_CONSISTENCY_TOL, rtol=0
            ):
                raise DimensionError("Chat is not the low-frequency transform of C")


@dataclass(frozen=True)
class MeasurementSet:
    """A noisy intensity vector together with its noise bookkeeping.

    y == clean + noise exactly as drawn; negative entries are retained
    because the objective and the correlation matrices are well defined
    for them.  `clean` may be absent for externally measured data.
    """

    y: np.ndarray
    clean: np.ndarray | None
    noise_std: float
    snr_db: float | None
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "y", as_real_vector(self.y, "y"))
        if self.clean is not None:
            object.__setattr__(self, "clean", as_real_vector(self.clean, "clean"))
            if self.y.size != self.clean.size:
                raise DimensionError(
                    f"y has length {self.y.size} but clean has length {self.clean.size}"
                )
            if np.any(self.clean < 0):
                raise DimensionError("clean intensities must be nonnegative")
        if self.noise_std < 0:
            raise DimensionError("noise_std must be nonnegative")


def _expect_shape(arr: np.ndarray, shape: tuple[int, int], name: str) -> None:
    if arr.shape != shape:
        raise DimensionError(f"{name} has shape {arr.shape}, expected {shape}")


def synthesize_instance(
    n: int, k: int, s: int, m: int, mode: str, rng: SeededRng
) -> ProblemInstance:
    """Draw a random problem instance with ground truth.

    In direct-gaussian mode, Bhat and Chat have i.i.d. CN(0, 1) entries and
    no full-resolution matrices are stored.  In convolutional mode, B and C
    have i.i.d. CN(0, 1) entries and Bhat, Chat are their low-frequency
    transforms (the rows of a unitary DFT are orthonormal, so the entries
    of Bhat and Chat are again i.i.d. CN(0, 1)).  The ground truth g is a
    complex Gaussian draw normalized to unit norm; z is left CN(0, I) so
    its norm carries the problem's energy scale.
    """
    if mode == "direct-gaussian":
        instance_kwargs = dict(
            bhat=sample_complex_gaussian_matrix(rng, m, k),
            chat=sample_complex_gaussian_matrix(rng, m, s),
        )
    elif mode == "convolutional":
        if not m < n:
            raise DimensionError(f"convolutional mode requires m < n, got m={m}, n={n}")
        b = sample_complex_gaussian_matrix(rng, n, k)
        c = sample_complex_gaussian_matrix(rng, n, s)
        flo = partial_dft_matrix(n, m)
        instance_kwargs = dict(b=b, c=c, bhat=flo @ b, chat=flo @ c)
    else:
        raise ConfigError(f"cannot synthesize mode {mode!r}; use direct-gaussian or convolutional")
    g = sample_complex_gaussian(rng, k)
    g = g / np.linalg.norm(g)
    z = sample_complex_gaussian(rng, s)
    return ProblemInstance(n=n, k=k, s=s, m=m, mode=mode, g_true=g, z_true=z, **instance_kwargs)


def forward_intensities(bhat, chat, g, z) -> np.ndarray:
    """Noise-free intensities |Bhat g|^2 * |Chat z|^2, entrywise."""
    bhat = as_matrix(bhat, "Bhat")
    chat = as_matrix(chat, "Chat")
    g = as_vector(g, "g")
    z = as_vector(z, "z")
    if bhat.shape[0] != chat.shape[0]:
        raise DimensionError(
            f"Bhat has {bhat.shape[0]} rows but Chat has {chat.shape[0]}"
        )
    if bhat.shape[1] != g.size:
        raise DimensionError(f"Bhat has {bhat.shape[1]} columns but g has length {g.size}")
    if chat.shape[1] != z.size:
        raise DimensionError(f"Chat has {chat.shape[1]} columns but z has length {z.size}")
    return np.abs(bhat @ g) ** 2 * np.abs(chat @ z) ** 2


def forward_convolutional(b, c, g, z, m: int) -> np.ndarray:
    """Physical-domain intensities |partial_dft(circular_convolve(C z, B g), m)|^2.

    Equals n * forward_intensities(F_lo B, F_lo C, g, z); the factor n is
    the convolution-theorem constant of the unitary DFT.
    """
    b = as_matrix(b, "B")
    c = as_matrix(c, "C")
    if b.shape[0] != c.shape[0]:
        raise DimensionError(f"B has {b.shape[0]} rows but C has {c.shape[0]}")
    h = _matvec(b, g, "B", "g")
    x = _matvec(c, z, "C", "z")
    spectrum = partial_dft(circular_convolve(x, h), m)
    return np.abs(spectrum) ** 2


def _matvec(a: np.ndarray, v, a_name: str, v_name: str) -> np.ndarray:
    v = as_vector(v, v_name)
    if a.shape[1] != v.size:
        raise DimensionError(
            f"{a_name} has {a.shape[1]} columns but {v_name} has length {v.size}"
        )
    return a @ v


def noise_std_for_snr(clean, target_snr_db: float) -> float:
    """Per-sample noise standard deviation that realizes a target SNR in dB.

    Inverts `metrics.snr_db`: m * sigma^2 == ||clean||^2 * 10^(-snr/10).
    """
    clean = as_real_vector(clean, "clean")
    energy = float(np.sum(clean**2))
    if energy == 0.0:
        raise DegenerateInputError("clean measurement vector has zero energy")
    return math.sqrt(energy * 10.0 ** (-target_snr_db / 10.0) / clean.size)


def add_noise(clean, noise_std: float, rng: SeededRng) -> MeasurementSet:
    """Add i.i.d. real Gaussian noise; negative results are kept unclipped."""
    clean = as_real_vector(clean, "clean")
    if noise_std < 0:
        raise DimensionError("noise_std must be nonnegative")
    if noise_std == 0:
        y = clean.copy()
        level = None
    else:
        y = clean + noise_std * rng.gen.standard_normal(clean.size)
        level = (
            snr_db(clean, noise_std, clean.size) if np.any(clean != 0) else None
        )
    return MeasurementSet(y=y, clean=clean, noise_std=float(noise_std), snr_db=level, seed=rng.stream)


# --- instance file format ---------------------------------------------------
#
# JSON object with integer fields n, k, s, m; string field mode; complex
# matrices as arrays of rows, each entry a 2-array [re, im]; complex vectors
# as arrays of [re, im]; optional fields B, C, g_true, z_true; an optional
# "measurements" block {y, clean?, noise_std, seed}.  Unknown extra fields
# are ignored; any dimension mismatch is rejected.


def _encode_cvec(v: np.ndarray) -> list:
    return [[float(x.real), float(x.imag)] for x in v]


def _encode_cmat(a: np.ndarray) -> list:
    return [[[float(x.real), float(x.imag)] for x in row] for row in a]


def _decode_entry(obj, field: str) -> complex:
    if (
        not isinstance(obj, list)
        or len(obj) != 2
        or not all(isinstance(p, (int, float)) and not isinstance(p, bool) for p in obj)
    ):
        raise InstanceFormatError(f"field {field!r}: expected [re, im] pairs")
    return complex(obj[0], obj[1])


def _decode_cvec(obj, field: str) -> np.ndarray:
    if not isinstance(obj, list) or not obj:
        raise InstanceFormatError(f"field {field!r}: expected a nonempty array")
    return np.array([_decode_entry(e, field) for e in obj], dtype=np.complex128)


def _decode_cmat(obj, field: str) -> np.ndarray:
    if not isinstance(obj, list) or not obj:
        raise InstanceFormatError(f"field {field!r}: expected a nonempty array of rows")
    rows = []
    width = None
    for row in obj:
        if not isinstance(row, list) or not row:
            raise InstanceFormatError(f"field {field!r}: each row must be a nonempty array")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise InstanceFormatError(f"field {field!r}: ragged rows")
        rows.append([_decode_entry(e, field) for e in row])
    return np.array(rows, dtype=np.complex128)


def _decode_rvec(obj, field: str) -> np.ndarray:
    if (
        not isinstance(obj, list)
        or not obj
        or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in obj)
    ):
        raise InstanceFormatError(f"field {field!r}: expected a nonempty array of reals")
    return np.array(obj, dtype=np.float64)


def _require_int(doc: dict, field: str) -> int:
    if field not in doc:
        raise InstanceFormatError(f"missing required field {field!r}")
    value = doc[field]
    if not isinstance(value, int) or isinstance(value, bool):
        raise InstanceFormatError(f"field {field!r}: expected an integer")
    return value


def save_instance(
    instance: ProblemInstance, measurements: MeasurementSet | None, path
) -> None:
    """Write an instance (and optionally its measurements) as JSON.

    The round trip through `load_instance` is lossless for finite doubles:
    floats are serialized with their shortest round-trip representation.
    """
    doc: dict = {
        "format": "bliphasu-instance",
        "version": 1,
        "n": instance.n,
        "k": instance.k,
        "s": instance.s,
        "m": instance.m,
        "mode": instance.mode,
        "Bhat": _encode_cmat(instance.bhat),
        "Chat": _encode_cmat(instance.chat),
    }
    if instance.b is not None:
        doc["B"] = _encode_cmat(instance.b)
    if instance.c is not None:
        doc["C"] = _encode_cmat(instance.c)
    if instance.g_true is not None:
        doc["g_true"] = _encode_cvec(instance.g_true)
    if instance.z_true is not None:
        doc["z_true"] = _encode_cvec(instance.z_true)
    if measurements is not None:
        if measurements.y.size != instance.m:
            raise DimensionError(
                f"measurements have length {measurements.y.size}, expected m={instance.m}"
            )
        block = {
            "y": measurements.y.tolist(),
            "noise_std": measurements.noise_std,
            "seed": measurements.seed,
        }
        if measurements.clean is not None:
            block["clean"] = measurements.clean.tolist()
        if measurements.snr_db is not None:
            block["snr_db"] = measurements.snr_db
        doc["measurements"] = block
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_instance(path) -> tuple[ProblemInstance, MeasurementSet | None]:
    """Read an instance file, validating every dimension against (n, k, s, m).

    Raises InstanceFormatError with the offending field (or the JSON parse
    position) on malformed input.  Unknown extra fields are ignored.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(doc, dict):
        raise InstanceFormatError(f"{path}: top-level value must be an object")

    n = _require_int(doc, "n")
    k = _require_int(doc, "k")
    s = _require_int(doc, "s")
    m = _require_int(doc, "m")
    mode = doc.get("mode")
    if mode not in MODES:
        raise InstanceFormatError(f"field 'mode': expected one of {MODES}, got {mode!r}")
    if "Bhat" not in doc or "Chat" not in doc:
        raise InstanceFormatError("missing required field 'Bhat' or 'Chat'")

    fields: dict = {
        "bhat": _decode_cmat(doc["Bhat"], "Bhat"),
        "chat": _decode_cmat(doc["Chat"], "Chat"),
    }
    expected = {"Bhat": (m, k), "Chat": (m, s), "B": (n, k), "C": (n, s)}
    for field, attr in (("B", "b"), ("C", "c")):
        if field in doc:
            fields[attr] = _decode_cmat(doc[field], field)
    for field, attr, length in (("g_true", "g_true", k), ("z_true", "z_true", s)):
        if field in doc:
            vec = _decode_cvec(doc[field], field)
            if vec.size != length:
                raise InstanceFormatError(
                    f"field {field!r}: length {vec.size} does not match expected {length}"
                )
            fields[attr] = vec
    for field, attr in (("Bhat", "bhat"), ("Chat", "chat"), ("B", "b"), ("C", "c")):
        if attr in fields and fields[attr].shape != expected[field]:
            raise InstanceFormatError(
                f"field {field!r}: shape {fields[attr].shape} does not match expected {expected[field]}"
            )
    try:
        instance = ProblemInstance(n=n, k=k, s=s, m=m, mode=mode, **fields)
    except (DimensionError, ConfigError) as exc:
        raise InstanceFormatError(f"{path}: {exc}") from exc

    measurements = None
    if "measurements" in doc:
        block = doc["measurements"]
        if not isinstance(block, dict):
            raise InstanceFormatError("field 'measurements': expected an object")
        if "y" not in block:
            raise InstanceFormatError("field 'measurements.y' is required")
        y = _decode_rvec(block["y"], "measurements.y")
        if y.size != m:
            raise InstanceFormatError(
                f"field 'measurements.y': length {y.size} does not match m={m}"
            )
        clean = None
        if "clean" in block:
            clean = _decode_rvec(block["clean"], "measurements.clean")
            if clean.size != m:
                raise InstanceFormatError(
                    f"field 'measurements.clean': length {clean.size} does not match m={m}"
                )
        noise_std = block.get("noise_std", 0.0)
        if isinstance(noise_std, bool) or not isinstance(noise_std, (int, float)):
            raise InstanceFormatError("field 'measurements.noise_std': expected a real number")
        seed = block.get("seed", 0)
        if isinstance(seed, bool) or not isinstance(seed, int):
            raise InstanceFormatError("field 'measurements.seed': expected an integer")
        level = block.get("snr_db")
        if level is not None and (
            isinstance(level, bool) or not isinstance(level, (int, float))
        ):
            raise InstanceFormatError("field 'measurements.snr_db': expected a real number")
        try:
            measurements = MeasurementSet(
                y=y, clean=clean, noise_std=float(noise_std), snr_db=level, seed=seed
            )
        except DimensionError as exc:
            raise InstanceFormatError(f"{path}: {exc}") from exc
    return instance, measurements
