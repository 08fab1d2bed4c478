"""Experiment sweeps over the measurement ratio, plus file-driven recovery.

Each sweep cell is a (ratio, snr, init-mode) triple; the ratio r maps to
m = ceil(r * (k + s)) measurements.  Every trial derives its own random
stream from (master seed, cell, trial index), so the entire report is a
pure function of the configuration and reruns are bit-identical; trials
never influence each other regardless of execution order.

Two sweeps are provided: `experiment_init_quality` scores the spectral
starting point alone across ratios and noise levels, and
`experiment_success_rate` runs the full pipeline on noise-free cells and
reports the fraction of trials whose final aligned pair error beats the
success threshold (1e-5 by default), comparing spectral against random
starts.

Sweep refinement defaults differ from the bare library defaults in two
places, both to match the fixed-iteration benchmark protocol: the batch
is the full index set and the stopping tolerance is small (1e-9) so the
iteration cap, not the Algorithm-level tol of 1e-2, is what ends
non-converged runs.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .core import SeededRng, sample_complex_gaussian
from .errors import (
    ConfigError,
    DegenerateInputError,
    DegenerateSpectrumError,
    DivergenceError,
    InstanceFormatError,
)
from .metrics import align_scale, dist, pair_error
from .model import (
    add_noise,
    forward_intensities,
    load_instance,
    noise_std_for_snr,
    synthesize_instance,
)
from .refine import RefineConfig, bliphasu, run_refinement
from .spectral import initialize

#: Refinement defaults for the benchmark sweeps: full-batch directions and a
#: tolerance small enough that the 500-iteration cap governs termination.
SWEEP_REFINE_DEFAULTS = RefineConfig(q="full", tol=1e-9)

DEFAULT_SUCCESS_THRESHOLD = 1e-5

INIT_MODES = ("spectral", "random")


@dataclass(frozen=True)
class ExperimentConfig:
    """A sweep definition: dimensions, cells, trial count, and solver settings."""

    k: int
    s: int
    ratios: tuple[float, ...]
    snrs: tuple[float | None, ...] = (None,)  # None means noise-free
    trials: int = 50
    init_modes: tuple[str, ...] = ("spectral",)
    refine: RefineConfig = field(default_factory=lambda: SWEEP_REFINE_DEFAULTS)
    power_iters: int = 150
    master_seed: int = 0
    success_threshold: float = DEFAULT_SUCCESS_THRESHOLD

    def __post_init__(self):
        object.__setattr__(self, "ratios", tuple(float(r) for r in self.ratios))
        object.__setattr__(
            self, "snrs", tuple(None if v is None else float(v) for v in self.snrs)
        )
        object.__setattr__(self, "init_modes", tuple(self.init_modes))
        if self.k < 1 or self.s < 1:
            raise ConfigError(f"k and s must be positive, got k={self.k}, s={self.s}")
        if not self.ratios:
            raise ConfigError("ratio grid must be nonempty")
        if any(not (r > 0 and math.isfinite(r)) for r in self.ratios):
            raise ConfigError("every ratio must be a positive finite number")
        if any(v is not None and not math.isfinite(v) for v in self.snrs):
            raise ConfigError("every SNR must be finite or None (noise-free)")
        if self.trials < 1:
            raise ConfigError(f"trials must be at least 1, got {self.trials}")
        if not self.init_modes or any(mode not in INIT_MODES for mode in self.init_modes):
            raise ConfigError(f"init modes must be drawn from {INIT_MODES}")
        if self.power_iters < 1:
            raise ConfigError(f"power_iters must be positive, got {self.power_iters}")
        if not self.success_threshold > 0:
            raise ConfigError("success_threshold must be positive")
        if isinstance(self.refine.q, int) and self.refine.q > self.m_for(min(self.ratios)):
            raise ConfigError(
                f"minibatch size q={self.refine.q} exceeds the smallest cell's "
                f"m={self.m_for(min(self.ratios))}"
            )

    def m_for(self, ratio: float) -> int:
        return math.ceil(ratio * (self.k + self.s))


@dataclass(frozen=True)
class TrialRecord:
    ratio: float
    snr_db: float | None
    init_mode: str
    trial: int
    m: int
    init_pair_error: float
    final_pair_error: float
    success: bool
    iterations: int
    stop_reason: str
    wall_time_s: float


@dataclass(frozen=True)
class CellSummary:
    ratio: float
    snr_db: float | None
    init_mode: str
    trials: int
    mean_pair_error: float
    success_rate: float
    mean_iterations: float
    wall_time_s: float


@dataclass(frozen=True)
class ExperimentReport:
    kind: str  # "init-quality" or "success-rate"
    cells: tuple[CellSummary, ...]
    trials: tuple[TrialRecord, ...]


def _snr_key(snr: float | None) -> float:
    return -math.inf if snr is None else snr


def _draw_init(config, instance, y, rng, init_mode):
    """Initial pair for a trial: spectral eigenvectors or random directions.

    Random mode keeps the spectral energy scale sqrt(lambda_z/2) so the two
    baselines differ only in direction.
    """
    init = initialize(y, instance.bhat, instance.chat, config.power_iters, rng.derive("init"))
    if init_mode == "spectral":
        return init.g0, init.z0, init.lambda_z
    r = rng.derive("random-init")
    g0 = sample_complex_gaussian(r, instance.k)
    g0 = g0 / np.linalg.norm(g0)
    z0 = sample_complex_gaussian(r, instance.s)
    z0 = z0 / np.linalg.norm(z0) * math.sqrt(max(init.lambda_z, 0.0) / 2.0)
    return g0, z0, init.lambda_z


def run_trial(
    config: ExperimentConfig,
    ratio: float,
    snr: float | None,
    init_mode: str,
    trial_index: int,
    refine: bool = True,
) -> TrialRecord:
    """One fully deterministic trial of one sweep cell.

    A diverged or degenerate solve is recorded as a failed trial with an
    infinite error, never raised.
    """
    started = time.perf_counter()
    m = config.m_for(ratio)
    snr_tag = "noise-free" if snr is None else float(snr)
    rng = SeededRng(config.master_seed).derive("trial", float(ratio), snr_tag, init_mode, trial_index)

    instance = synthesize_instance(m, config.k, config.s, m, "direct-gaussian", rng.derive("instance"))
    clean = forward_intensities(instance.bhat, instance.chat, instance.g_true, instance.z_true)
    noise_std = 0.0 if snr is None else noise_std_for_snr(clean, snr)
    measured = add_noise(clean, noise_std, rng.derive("noise"))

    init_err = math.inf
    final_err = math.inf
    iterations = 0
    stop_reason = "failed"
    try:
        g0, z0, lambda_z = _draw_init(config, instance, measured.y, rng, init_mode)
        init_err = pair_error(g0, z0, instance.g_true, instance.z_true)
        if refine:
            resolved = config.refine.resolved(m, lambda_z=lambda_z)
            out = run_refinement(
                g0,
                z0,
                measured.y,
                instance.bhat,
                instance.chat,
                resolved,
                rng.derive("minibatch"),
                g_true=instance.g_true,
                z_true=instance.z_true,
            )
            final_err = pair_error(out.g, out.z, instance.g_true, instance.z_true)
            iterations = len(out.trace)
            stop_reason = out.stop_reason
        else:
            final_err = init_err
            stop_reason = "init-only"
    except (DivergenceError, DegenerateInputError, DegenerateSpectrumError, ConfigError):
        pass  # recorded as a failed trial below
    return TrialRecord(
        ratio=float(ratio),
        snr_db=snr,
        init_mode=init_mode,
        trial=trial_index,
        m=m,
        init_pair_error=init_err,
        final_pair_error=final_err,
        success=final_err < config.success_threshold,
        iterations=iterations,
        stop_reason=stop_reason,
        wall_time_s=time.perf_counter() - started,
    )


def _aggregate(kind: str, config: ExperimentConfig, records: list[TrialRecord]) -> ExperimentReport:
    records = sorted(
        records, key=lambda r: (r.ratio, _snr_key(r.snr_db), r.init_mode, r.trial)
    )
    cells = []
    seen = sorted(
        {(r.ratio, r.snr_db, r.init_mode) for r in records},
        key=lambda c: (c[0], _snr_key(c[1]), c[2]),
    )
    for ratio, snr, mode in seen:
        group = [
            r for r in records if (r.ratio, r.snr_db, r.init_mode) == (ratio, snr, mode)
        ]
        cells.append(
            CellSummary(
                ratio=ratio,
                snr_db=snr,
                init_mode=mode,
                trials=len(group),
                mean_pair_error=float(np.mean([r.final_pair_error for r in group])),
                success_rate=float(np.mean([r.success for r in group])),
                mean_iterations=float(np.mean([r.iterations for r in group])),
                wall_time_s=float(np.sum([r.wall_time_s for r in group])),
            )
        )
    return ExperimentReport(kind=kind, cells=tuple(cells), trials=tuple(records))


def experiment_init_quality(config: ExperimentConfig) -> ExperimentReport:
    """Sweep ratios x SNR levels scoring the starting pair only (no refinement)."""
    records = [
        run_trial(config, ratio, snr, mode, trial, refine=False)
        for ratio in config.ratios
        for snr in config.snrs
        for mode in config.init_modes
        for trial in range(config.trials)
    ]
    return _aggregate("init-quality", config, records)


def experiment_success_rate(config: ExperimentConfig) -> ExperimentReport:
    """Sweep ratios x init modes on noise-free cells through the full pipeline."""
    if any(snr is not None for snr in config.snrs):
        raise ConfigError("the success-rate sweep is defined for noise-free cells only")
    records = [
        run_trial(config, ratio, None, mode, trial, refine=True)
        for ratio in config.ratios
        for mode in config.init_modes
        for trial in range(config.trials)
    ]
    return _aggregate("success-rate", config, records)


# --- report emission ---------------------------------------------------------

CSV_COLUMNS = (
    "ratio",
    "snr_db",
    "init_mode",
    "trials",
    "mean_pair_error",
    "success_rate",
    "mean_iterations",
    "wall_time_s",
)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def report_csv(report: ExperimentReport, include_timing: bool = True) -> str:
    """Render the per-cell summaries as CSV text with a fixed column order.

    With include_timing=False the wall-time cells are left empty, which
    makes the output a pure function of (config, master seed).
    """
    lines = [",".join(CSV_COLUMNS)]
    for cell in report.cells:
        lines.append(
            ",".join(
                (
                    _fmt(cell.ratio),
                    _fmt(cell.snr_db),
                    cell.init_mode,
                    _fmt(cell.trials),
                    _fmt(cell.mean_pair_error),
                    _fmt(cell.success_rate),
                    _fmt(cell.mean_iterations),
                    _fmt(cell.wall_time_s) if include_timing else "",
                )
            )
        )
    return "\n".join(lines) + "\n"


def report_json(report: ExperimentReport, include_timing: bool = True) -> str:
    """Render the report as JSON mirroring the CSV schema, plus per-trial rows."""
    doc = {
        "kind": report.kind,
        "cells": [
            {
                "ratio": c.ratio,
                "snr_db": c.snr_db,
                "init_mode": c.init_mode,
                "trials": c.trials,
                "mean_pair_error": c.mean_pair_error,
                "success_rate": c.success_rate,
                "mean_iterations": c.mean_iterations,
                "wall_time_s": c.wall_time_s if include_timing else None,
            }
            for c in report.cells
        ],
        "trials": [
            {
                "ratio": t.ratio,
                "snr_db": t.snr_db,
                "init_mode": t.init_mode,
                "trial": t.trial,
                "m": t.m,
                "init_pair_error": t.init_pair_error,
                "final_pair_error": t.final_pair_error,
                "success": t.success,
                "iterations": t.iterations,
                "stop_reason": t.stop_reason,
                "wall_time_s": t.wall_time_s if include_timing else None,
            }
            for t in report.trials
        ],
    }
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def report_svg(report: ExperimentReport, metric: str | None = None) -> str:
    """Render one polyline per (snr, init-mode) series over the ratio axis.

    Deliberately minimal: axes, series polylines, and a text legend.  The
    plotted metric defaults to the success rate for success-rate reports
    and the mean pair error otherwise.
    """
    if metric is None:
        metric = "success_rate" if report.kind == "success-rate" else "mean_pair_error"
    if metric not in ("success_rate", "mean_pair_error"):
        raise ConfigError(f"unknown SVG metric {metric!r}")
    width, height = 640, 420
    left, right, top, bottom = 60, 620, 20, 370
    series_keys = sorted(
        {(c.snr_db, c.init_mode) for c in report.cells},
        key=lambda key: (_snr_key(key[0]), key[1]),
    )
    ratios = sorted({c.ratio for c in report.cells})
    values = [getattr(c, metric) for c in report.cells if math.isfinite(getattr(c, metric))]
    v_max = max(values, default=1.0)
    v_max = v_max if v_max > 0 else 1.0
    r_min, r_max = (min(ratios), max(ratios)) if ratios else (0.0, 1.0)
    r_span = (r_max - r_min) or 1.0

    def sx(ratio):
        return left + (ratio - r_min) / r_span * (right - left)

    def sy(value):
        if not math.isfinite(value):
            value = v_max
        return bottom - min(value, v_max) / v_max * (bottom - top)

    palette = ("#2c7bb6", "#d7191c", "#fdae61", "#1a9641", "#7b3294", "#636363")
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{bottom}" stroke="black"/>',
        f'<text x="{(left + right) // 2}" y="{height - 8}" font-size="13" '
        f'text-anchor="middle">measurement ratio m/(k+s)</text>',
        f'<text x="14" y="{(top + bottom) // 2}" font-size="13" text-anchor="middle" '
        f'transform="rotate(-90 14 {(top + bottom) // 2})">{metric}</text>',
    ]
    for ratio in ratios:
        x = sx(ratio)
        parts.append(f'<line x1="{x:.1f}" y1="{bottom}" x2="{x:.1f}" y2="{bottom + 4}" stroke="black"/>')
        parts.append(
            f'<text x="{x:.1f}" y="{bottom + 18}" font-size="11" text-anchor="middle">{ratio:g}</text>'
        )
    for frac in (0.0, 0.5, 1.0):
        y = bottom - frac * (bottom - top)
        parts.append(f'<line x1="{left - 4}" y1="{y:.1f}" x2="{left}" y2="{y:.1f}" stroke="black"/>')
        parts.append(
            f'<text x="{left - 8}" y="{y + 4:.1f}" font-size="11" text-anchor="end">{frac * v_max:.3g}</text>'
        )
    for i, (snr, mode) in enumerate(series_keys):
        color = palette[i % len(palette)]
        pts = [
            (sx(c.ratio), sy(getattr(c, metric)))
            for c in sorted(report.cells, key=lambda c: c.ratio)
            if (c.snr_db, c.init_mode) == (snr, mode)
        ]
        if pts:
            path = " ".join(f"{x:.1f},{y:.1f}" for x, y in pts)
            parts.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="2"/>')
        label = f"{'noise-free' if snr is None else f'{snr:g} dB'} / {mode}"
        ly = top + 16 + 16 * i
        parts.append(f'<line x1="{right - 150}" y1="{ly - 4}" x2="{right - 130}" y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{right - 124}" y="{ly}" font-size="11">{label}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_report(
    report: ExperimentReport,
    fmt: str,
    out_path,
    include_timing: bool = True,
    svg_metric: str | None = None,
) -> list[str]:
    """Write the report to `out_path` in the requested format.

    Returns the list of written paths.  I/O failures surface as OSError
    with the path in the message.
    """
    if fmt == "csv":
        text = report_csv(report, include_timing=include_timing)
    elif fmt == "json":
        text = report_json(report, include_timing=include_timing)
    elif fmt == "svg":
        text = report_svg(report, metric=svg_metric)
    else:
        raise ConfigError(f"unknown report format {fmt!r}; expected csv, json, or svg")
    try:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write report to {out_path}: {exc}") from exc
    return [str(out_path)]


# --- single-run recovery ------------------------------------------------------


def recover_from_file(
    instance_path,
    config: RefineConfig | None = None,
    out_path=None,
    init_mode: str = "spectral",
    init_iters: int = 150,
) -> dict:
    """Recover coefficients (and signals, when possible) from an instance file.

    The file must carry a measurement block.  The returned report holds the
    estimates, the refinement trace, and, when the file includes ground
    truth, the aligned error metrics.  With the same seed this matches the
    in-memory pipeline bit for bit.
    """
    instance, measurements = load_instance(instance_path)
    if measurements is None:
        raise InstanceFormatError(f"{instance_path}: no measurement block; nothing to recover")
    config = config if config is not None else RefineConfig()
    result = bliphasu(
        measurements.y, instance, init_iters=init_iters, config=config, init_mode=init_mode
    )

    def enc(vec):
        return [[float(v.real), float(v.imag)] for v in vec]

    doc: dict = {
        "g_hat": enc(result.g_hat),
        "z_hat": enc(result.z_hat),
        "stop_reason": result.stop_reason,
        "iterations": len(result.trace),
        "lambda_z": result.lambda_z,
        "trace": {
            "objective": [r.objective for r in result.trace],
            "dg_norm": [r.dg_norm for r in result.trace],
            "dz_norm": [r.dz_norm for r in result.trace],
        },
    }
    if result.x_hat is not None:
        doc["x_hat"] = enc(result.x_hat)
    if result.h_hat is not None:
        doc["h_hat"] = enc(result.h_hat)
    if instance.g_true is not None and instance.z_true is not None:
        doc["pair_error"] = pair_error(
            result.g_hat, result.z_hat, instance.g_true, instance.z_true
        )
        doc["init_pair_error"] = pair_error(
            result.g0, result.z0, instance.g_true, instance.z_true
        )
        doc["trace"]["pair_error"] = [r.pair_error for r in result.trace]
        aligned = align_scale(result.g_hat, result.z_hat)
        doc["relative_error_g"] = dist(aligned.g_aligned, instance.g_true) / float(
            np.linalg.norm(instance.g_true)
        )
        doc["relative_error_z"] = dist(aligned.z_aligned, instance.z_true) / float(
            np.linalg.norm(instance.z_true)
        )
    if out_path is not None:
        try:
            with open(out_path, "w", encoding="utf-8") as fh:
                json.dump(doc, fh, indent=1, sort_keys=True)
                fh.write("\n")
        except OSError as exc:
            raise OSError(f"cannot write recovery report to {out_path}: {exc}") from exc
    return doc
