"""Stochastic Wirtinger-gradient refinement of the spectral starting point.

The target is the intensity least-squares objective

    f(g, z) = (1/2m) * sum_l (y[l] - |u_l|^2 |v_l|^2)^2,

with u_l = (row_l of Bhat) g and v_l = (row_l of Chat) z.  Writing
gamma[l] = |u_l|^2 |v_l|^2 - y[l], the Wirtinger gradients are

    grad_g f = (1/m) sum_l gamma[l] |v_l|^2 b_l (b_l^H g),
    grad_z f = (1/m) sum_l gamma[l] |u_l|^2 c_l (c_l^H z),

where b_l^H is the l-th row of Bhat.  One iteration evaluates both
directions on a random index subset of cardinality Q at the current pair
(a simultaneous, Jacobi-style update) and steps each variable with its
own step size.  The sum keeps the 1/m normalization regardless of Q, so
the minibatch direction is (Q/m) times the full gradient in expectation
and the effective step shrinks with Q.

The loop stops when a direction norm falls below `tol` (by default when
either one does; a stricter both-norms mode is available) or at the
iteration cap.  Direction norms include the 1/m factor and exclude the
step sizes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .core import SeededRng, as_matrix, as_real_vector, as_vector, sample_complex_gaussian
from .errors import (
    ConfigError,
    DegenerateInputError,
    DimensionError,
    DivergenceError,
)
from .metrics import pair_error
from .model import ProblemInstance, forward_intensities
from .spectral import DEFAULT_POWER_ITERS, initialize

STOP_MODES = ("either", "both")

DEFAULT_STEP_SCALE = 0.2  # default alpha = DEFAULT_STEP_SCALE / lambda_z


@dataclass(frozen=True)
class RefineConfig:
    """Step sizes, minibatch size, and stopping rule for the refinement loop.

    `alpha_g`/`alpha_z` left as None resolve to DEFAULT_STEP_SCALE divided
    by the initializer's leading eigenvalue (which tracks 2*||z||^2, making
    the default step scale-invariant).  `q` left as None resolves to
    ceil(m/10); the string "full" resolves to q = m, giving deterministic
    full-batch descent for any cell size.
    """

    alpha_g: float | None = None
    alpha_z: float | None = None
    q: int | str | None = None
    tol: float = 1e-2
    max_iters: int = 500
    seed: int = 0
    stop_mode: str = "either"

    def __post_init__(self):
        if self.alpha_g is not None and not self.alpha_g > 0:
            raise ConfigError(f"alpha_g must be positive, got {self.alpha_g}")
        if self.alpha_z is not None and not self.alpha_z > 0:
            raise ConfigError(f"alpha_z must be positive, got {self.alpha_z}")
        if isinstance(self.q, str):
            if self.q != "full":
                raise ConfigError(f"q must be a positive integer or 'full', got {self.q!r}")
        elif self.q is not None and self.q < 1:
            raise ConfigError(f"q must be positive, got {self.q}")
        if not self.tol > 0:
            raise ConfigError(f"tol must be positive, got {self.tol}")
        if self.max_iters < 1:
            raise ConfigError(f"max_iters must be at least 1, got {self.max_iters}")
        if self.stop_mode not in STOP_MODES:
            raise ConfigError(f"stop_mode must be one of {STOP_MODES}, got {self.stop_mode!r}")

    def resolved(self, m: int, lambda_z: float | None = None) -> "RefineConfig":
        """Fill in defaults that depend on the instance (m) and the init (lambda_z)."""
        alpha_g, alpha_z = self.alpha_g, self.alpha_z
        if alpha_g is None or alpha_z is None:
            if lambda_z is None or lambda_z <= 0:
                raise ConfigError(
                    "default step sizes need a positive leading eigenvalue; "
                    "set alpha_g and alpha_z explicitly"
                )
            default = DEFAULT_STEP_SCALE / lambda_z
            alpha_g = default if alpha_g is None else alpha_g
            alpha_z = default if alpha_z is None else alpha_z
        if self.q == "full":
            q = m
        elif self.q is None:
            q = max(1, math.ceil(m / 10))
        else:
            q = self.q
        if q > m:
            raise ConfigError(f"minibatch size q={q} exceeds m={m}")
        return replace(self, alpha_g=alpha_g, alpha_z=alpha_z, q=q)


@dataclass(frozen=True)
class IterateState:
    """Current pair plus the last step-direction norms for the stopping rule."""

    g: np.ndarray
    z: np.ndarray
    t: int
    dg_norm: float
    dz_norm: float


@dataclass(frozen=True)
class TraceRecord:
    t: int
    objective: float
    dg_norm: float
    dz_norm: float
    pair_error: float | None


class RefineOutcome(NamedTuple):
    g: np.ndarray
    z: np.ndarray
    trace: list[TraceRecord]
    stop_reason: str  # "converged" or "max-iters"


@dataclass(frozen=True)
class RecoveryResult:
    """End-to-end output: refined coefficients plus full-resolution signals."""

    x_hat: np.ndarray | None
    h_hat: np.ndarray | None
    g_hat: np.ndarray
    z_hat: np.ndarray
    trace: list[TraceRecord]
    stop_reason: str
    g0: np.ndarray
    z0: np.ndarray
    lambda_z: float


def _check_problem(g, z, y, bhat, chat):
    g = as_vector(g, "g")
    z = as_vector(z, "z")
    y = as_real_vector(y, "y")
    bhat = as_matrix(bhat, "Bhat")
    chat = as_matrix(chat, "Chat")
    if bhat.shape != (y.size, g.size):
        raise DimensionError(f"Bhat has shape {bhat.shape}, expected ({y.size}, {g.size})")
    if chat.shape != (y.size, z.size):
        raise DimensionError(f"Chat has shape {chat.shape}, expected ({y.size}, {z.size})")
    return g, z, y, bhat, chat


def _objective_raw(g, z, y, bhat, chat) -> float:
    res = y - np.abs(bhat @ g) ** 2 * np.abs(chat @ z) ** 2
    return float(res @ res) / (2.0 * y.size)


def objective(g, z, y, bhat, chat) -> float:
    """Mean squared intensity misfit (1/2m) sum_l (y[l] - |u_l v_l|^2)^2."""
    g, z, y, bhat, chat = _check_problem(g, z, y, bhat, chat)
    res = y - forward_intensities(bhat, chat, g, z)
    return float(np.sum(res**2)) / (2.0 * y.size)


def residual(index: int, g, z, y, bhat, chat) -> float:
    """Signed residual gamma[index] = |u v|^2 - y[index] for one measurement."""
    g, z, y, bhat, chat = _check_problem(g, z, y, bhat, chat)
    if not 0 <= index < y.size:
        raise DimensionError(f"index {index} out of range for m={y.size}")
    intensity = abs(bhat[index] @ g) ** 2 * abs(chat[index] @ z) ** 2
    return float(intensity - y[index])


def _directions(g, z, y, bhat, chat, batch):
    """Update directions on a batch, with the global 1/m normalization.

    Returns (d_g, d_z, gamma_batch); both directions are evaluated at the
    same (g, z).
    """
    m = y.size
    bh = bhat[batch]
    ch = chat[batch]
    u = bh @ g
    v = ch @ z
    au2 = np.abs(u) ** 2
    av2 = np.abs(v) ** 2
    gamma = au2 * av2 - y[batch]
    d_g = bh.conj().T @ (gamma * av2 * u) / m
    d_z = ch.conj().T @ (gamma * au2 * v) / m
    return d_g, d_z, gamma


def full_gradient(g, z, y, bhat, chat) -> tuple[np.ndarray, np.ndarray]:
    """Wirtinger gradients of the objective (the Q = m update directions)."""
    g, z, y, bhat, chat = _check_problem(g, z, y, bhat, chat)
    d_g, d_z, _ = _directions(g, z, y, bhat, chat, np.arange(y.size))
    return d_g, d_z


def sample_minibatch(m: int, q: int, rng: SeededRng) -> np.ndarray:
    """Draw a uniformly random q-subset of {0, ..., m-1} without replacement."""
    if not 1 <= q <= m:
        raise ConfigError(f"need 1 <= q <= m, got q={q}, m={m}")
    if q == m:
        return np.arange(m)
    return rng.gen.choice(m, size=q, replace=False)


def sgd_step(state: IterateState, batch, config: RefineConfig, y, bhat, chat) -> IterateState:
    """One simultaneous update of (g, z) along the batch directions.

    Both directions are computed at the incoming state before either
    variable moves.  The recorded norms are those of the 1/m-normalized
    direction sums, before multiplication by the step sizes.
    """
    batch = np.asarray(batch, dtype=np.intp)
    if batch.size == 0:
        raise ConfigError("empty minibatch")
    if config.alpha_g is None or config.alpha_z is None:
        raise ConfigError("config has unresolved step sizes; call resolved() first")
    y = as_real_vector(y, "y")
    if np.any(batch < 0) or np.any(batch >= y.size):
        raise ConfigError(f"batch indices out of range for m={y.size}")
    d_g, d_z, _ = _directions(state.g, state.z, y, bhat, chat, batch)
    return IterateState(
        g=state.g - config.alpha_g * d_g,
        z=state.z - config.alpha_z * d_z,
        t=state.t + 1,
        dg_norm=float(np.linalg.norm(d_g)),
        dz_norm=float(np.linalg.norm(d_z)),
    )


def _should_stop(dg_norm: float, dz_norm: float, tol: float, stop_mode: str) -> bool:
    if stop_mode == "either":
        return dg_norm < tol or dz_norm < tol
    return dg_norm < tol and dz_norm < tol


def run_refinement(
    g0,
    z0,
    y,
    bhat,
    chat,
    config: RefineConfig,
    rng: SeededRng | None = None,
    g_true=None,
    z_true=None,
) -> RefineOutcome:
    """Iterate minibatch updates until the stopping rule or the iteration cap.

    The stopping test uses the direction norms of the previous iteration,
    so the first iteration always runs; a run that exhausts `max_iters`
    reports "max-iters" even if its final norms are below `tol`.  The
    trace records, per completed iteration, the full-data objective and
    (when ground truth is supplied) the aligned pair error of the new
    iterate.

    Raises DivergenceError naming the iteration if an iterate leaves the
    finite range, which almost always means the step size is too large.
    """
    g, z, y, bhat, chat = _check_problem(g0, z0, y, bhat, chat)
    if np.linalg.norm(g) == 0.0 and np.linalg.norm(z) == 0.0:
        raise DegenerateInputError("both starting vectors are zero")
    m = y.size
    if config.alpha_g is None or config.alpha_z is None:
        raise ConfigError(
            "config has unresolved step sizes; call resolved() first or use bliphasu()"
        )
    if not isinstance(config.q, int):
        config = config.resolved(m)
    if config.q > m:
        raise ConfigError(f"minibatch size q={config.q} exceeds m={m}")
    if rng is None:
        rng = SeededRng(config.seed).derive("minibatch")
    truth_known = g_true is not None and z_true is not None

    state = IterateState(g=g, z=z, t=0, dg_norm=math.inf, dz_norm=math.inf)
    trace: list[TraceRecord] = []
    stop_reason = "max-iters"
    for _ in range(config.max_iters):
        if _should_stop(state.dg_norm, state.dz_norm, config.tol, config.stop_mode):
            stop_reason = "converged"
            break
        batch = sample_minibatch(m, config.q, rng)
        state = sgd_step(state, batch, config, y, bhat, chat)
        if not (
            np.all(np.isfinite(state.g))
            and np.all(np.isfinite(state.z))
            and math.isfinite(state.dg_norm)
            and math.isfinite(state.dz_norm)
        ):
            raise DivergenceError(
                f"non-finite iterate at iteration {state.t}; reduce the step sizes",
                iteration=state.t,
            )
        err = pair_error(state.g, state.z, g_true, z_true) if truth_known else None
        trace.append(
            TraceRecord(
                t=state.t,
                objective=_objective_raw(state.g, state.z, y, bhat, chat),
                dg_norm=state.dg_norm,
                dz_norm=state.dz_norm,
                pair_error=err,
            )
        )
    return RefineOutcome(g=state.g, z=state.z, trace=trace, stop_reason=stop_reason)


def bliphasu(
    y,
    instance: ProblemInstance,
    init_iters: int = DEFAULT_POWER_ITERS,
    config: RefineConfig | None = None,
    rng: SeededRng | None = None,
    init_mode: str = "spectral",
) -> RecoveryResult:
    """Full pipeline: spectral initialization followed by gradient refinement.

    With `init_mode="random"` the starting directions are random unit
    vectors instead of the leading eigenvectors, but z0 keeps the
    sqrt(lambda_z/2) energy scaling so the two baselines differ only in
    direction.  When the instance carries full-resolution subspace
    matrices, the refined coefficients are mapped back to x_hat = C z_hat
    and h_hat = B g_hat; otherwise those fields are None.

    Identical seeds produce bit-identical outputs.
    """
    if init_mode not in ("spectral", "random"):
        raise ConfigError(f"init_mode must be 'spectral' or 'random', got {init_mode!r}")
    config = config if config is not None else RefineConfig()
    rng = rng if rng is not None else SeededRng(config.seed)
    y = as_real_vector(y, "y")
    if y.size != instance.m:
        raise DimensionError(f"y has length {y.size}, expected m={instance.m}")

    init = initialize(y, instance.bhat, instance.chat, init_iters, rng.derive("init"))
    if init_mode == "random":
        r = rng.derive("random-init")
        g0 = sample_complex_gaussian(r, instance.k)
        g0 = g0 / np.linalg.norm(g0)
        z0_dir = sample_complex_gaussian(r, instance.s)
        z0_dir = z0_dir / np.linalg.norm(z0_dir)
        z0 = math.sqrt(max(init.lambda_z, 0.0) / 2.0) * z0_dir
    else:
        g0, z0 = init.g0, init.z0

    resolved = config.resolved(instance.m, lambda_z=init.lambda_z)
    out = run_refinement(
        g0,
        z0,
        y,
        instance.bhat,
        instance.chat,
        resolved,
        rng.derive("minibatch"),
        g_true=instance.g_true,
        z_true=instance.z_true,
    )
    x_hat = instance.c @ out.z if instance.c is not None else None
    h_hat = instance.b @ out.g if instance.b is not None else None
    return RecoveryResult(
        x_hat=x_hat,
        h_hat=h_hat,
        g_hat=out.g,
        z_hat=out.z,
        trace=out.trace,
        stop_reason=out.stop_reason,
        g0=g0,
        z0=z0,
        lambda_z=init.lambda_z,
    )
