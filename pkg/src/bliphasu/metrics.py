"""Error metrics that quotient out what intensity data cannot resolve.

Squared-magnitude measurements are blind to a global phase on each factor
and to the scale split between the two coefficient vectors: (g, z) and
(c*g, z/conj(c)) produce identical intensities for any nonzero complex c.
`dist` removes the phase, `align_scale` removes the scale split by moving
all magnitude onto the signal side, and `pair_error` combines both into
the symmetric per-pair error used by the experiment sweeps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import as_real_vector, as_vector
from .errors import DegenerateInputError, DimensionError


@dataclass(frozen=True)
class AlignedPair:
    """An estimate pair renormalized so the kernel coefficients are unit norm."""

    g_aligned: np.ndarray
    z_aligned: np.ndarray
    applied_scale: float


def dist(w1, w2) -> float:
    """Euclidean distance between w1 and w2 minimized over a global phase.

    Equals min over theta of ||w1 * exp(-1j*theta) - w2||, evaluated in
    closed form: the optimal theta is the phase of <w2, w1>, giving
    sqrt(max(0, ||w1||^2 + ||w2||^2 - 2*|<w1, w2>|)).
    """
    w1 = as_vector(w1, "w1")
    w2 = as_vector(w2, "w2")
    if w1.size != w2.size:
        raise DimensionError(f"length mismatch: {w1.size} vs {w2.size}")
    sq = (
        np.linalg.norm(w1) ** 2
        + np.linalg.norm(w2) ** 2
        - 2.0 * abs(np.vdot(w1, w2))
    )
    return math.sqrt(max(sq, 0.0))


def relative_error(w_est, w_true) -> float:
    """Phase-invariant distance normalized by the true vector's norm."""
    w_true = as_vector(w_true, "w_true")
    scale = np.linalg.norm(w_true)
    if scale == 0.0:
        raise DegenerateInputError("w_true has zero norm")
    return dist(w_est, w_true) / scale


def align_scale(g_est, z_est) -> AlignedPair:
    """Move the free scale from the kernel side to the signal side.

    Returns (g/||g||, z*||g||); every per-entry product (b^H g)(c^H z) is
    unchanged, so the forward intensities are invariant.
    """
    g_est = as_vector(g_est, "g_est")
    z_est = as_vector(z_est, "z_est")
    scale = float(np.linalg.norm(g_est))
    if scale == 0.0:
        raise DegenerateInputError("g_est has zero norm; scale split is undefined")
    return AlignedPair(g_est / scale, z_est * scale, scale)


def pair_error(g_est, z_est, g_true, z_true) -> float:
    """Symmetric average relative error of an estimate pair after alignment.

    dist(g_hat, g)/(2*||g||) + dist(z_hat, z)/(2*||z||) with the estimate
    pair first rescaled by `align_scale`, so the metric never penalizes the
    scale ambiguity the measurements cannot see.
    """
    g_true = as_vector(g_true, "g_true")
    z_true = as_vector(z_true, "z_true")
    g_norm = np.linalg.norm(g_true)
    z_norm = np.linalg.norm(z_true)
    if g_norm == 0.0 or z_norm == 0.0:
        raise DegenerateInputError("ground-truth vectors must be nonzero")
    aligned = align_scale(g_est, z_est)
    return (
        dist(aligned.g_aligned, g_true) / (2.0 * g_norm)
        + dist(aligned.z_aligned, z_true) / (2.0 * z_norm)
    )


def snr_db(clean, noise_std: float, m: int) -> float:
    """Signal-to-noise ratio 10*log10(||clean||^2 / (m * noise_std^2)) in dB.

    The noise energy of i.i.d. real Gaussian noise with per-sample standard
    deviation `noise_std` over m samples is m * noise_std^2.
    """
    clean = as_real_vector(clean, "clean")
    if m < 1:
        raise DimensionError(f"m must be positive, got {m}")
    energy = float(np.sum(clean**2))
    if energy == 0.0:
        raise DegenerateInputError("clean measurement vector has zero energy")
    if noise_std <= 0.0:
        raise DegenerateInputError("noise_std must be positive")
    return 10.0 * math.log10(energy / (m * noise_std**2))
