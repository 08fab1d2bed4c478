"""Command-line interface: instance simulation, recovery, and benchmark sweeps.

Subcommands:
    simulate      write a synthetic instance file (with measurements)
    recover       run the full pipeline on an instance file
    init-quality  sweep the spectral starting point over ratios x SNR levels
    success-rate  sweep the full pipeline over ratios, spectral vs random starts

Exit codes: 0 success, 1 usage or configuration error, 2 I/O or parse
error, 3 solver divergence in single-run mode.
"""

from __future__ import annotations

import argparse
import sys

from .core import SeededRng
from .errors import (
    BliPhaSuError,
    ConfigError,
    DegenerateInputError,
    DegenerateSpectrumError,
    DimensionError,
    DivergenceError,
    InstanceFormatError,
)
from .harness import (
    SWEEP_REFINE_DEFAULTS,
    ExperimentConfig,
    emit_report,
    experiment_init_quality,
    experiment_success_rate,
    recover_from_file,
)
from .model import add_noise, forward_intensities, noise_std_for_snr, save_instance, synthesize_instance
from .refine import RefineConfig

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_DIVERGED = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2; we reserve that for I/O
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(EXIT_USAGE)


def _parse_snr(token: str) -> float | None:
    if token == "noise-free":
        return None
    try:
        return float(token)
    except ValueError:
        raise ConfigError(f"bad SNR value {token!r}; use a dB number or 'noise-free'")


def _parse_snr_list(text: str) -> tuple[float | None, ...]:
    return tuple(_parse_snr(tok.strip()) for tok in text.split(",") if tok.strip())


def _parse_ratio_grid(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in text.split(",") if tok.strip())
    except ValueError:
        raise ConfigError(f"bad ratio grid {text!r}; use comma-separated numbers")


def _parse_q(token: str):
    if token == "full":
        return "full"
    try:
        return int(token)
    except ValueError:
        raise ConfigError(f"bad minibatch size {token!r}; use an integer or 'full'")


def _add_refine_flags(p: argparse.ArgumentParser, sweep: bool) -> None:
    defaults = SWEEP_REFINE_DEFAULTS if sweep else RefineConfig()
    p.add_argument("--q", type=_parse_q, default=defaults.q,
                   help="minibatch size, or 'full' (default: %(default)s)")
    p.add_argument("--alpha-g", type=float, default=None,
                   help="kernel-side step size (default: 0.2 / lambda_z)")
    p.add_argument("--alpha-z", type=float, default=None,
                   help="signal-side step size (default: 0.2 / lambda_z)")
    p.add_argument("--tol", type=float, default=defaults.tol,
                   help="stopping tolerance on direction norms (default: %(default)s)")
    p.add_argument("--max-iters", type=int, default=defaults.max_iters,
                   help="iteration cap (default: %(default)s)")
    p.add_argument("--stop-mode", choices=("either", "both"), default="either",
                   help="stop when either norm is below tol, or require both")
    p.add_argument("--power-iters", type=int, default=150,
                   help="power-iteration rounds in the initializer (default: %(default)s)")


def _refine_config(args, seed: int) -> RefineConfig:
    return RefineConfig(
        alpha_g=args.alpha_g,
        alpha_z=args.alpha_z,
        q=args.q,
        tol=args.tol,
        max_iters=args.max_iters,
        seed=seed,
        stop_mode=args.stop_mode,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bliphasu", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="synthesize an instance file")
    p.add_argument("--n", type=int, default=None, help="full-resolution length (default: 2*m)")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--mode", choices=("direct-gaussian", "convolutional"),
                   default="direct-gaussian")
    p.add_argument("--snr", type=_parse_snr, default=None,
                   help="SNR in dB, or 'noise-free' (default)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, metavar="PATH")

    p = sub.add_parser("recover", help="recover from an instance file")
    p.add_argument("instance", metavar="PATH")
    p.add_argument("--init", choices=("spectral", "random"), default="spectral")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, metavar="PATH")
    _add_refine_flags(p, sweep=False)

    p = sub.add_parser("init-quality", help="starting-point quality sweep")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--s", type=int, default=10)
    p.add_argument("--ratio-grid", type=_parse_ratio_grid, default=(2, 4, 6, 8, 10),
                   metavar="R1,R2,...")
    p.add_argument("--snr-list", type=_parse_snr_list, default=(None,),
                   metavar="SNR1,SNR2,...", help="dB values and/or 'noise-free'")
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--init", choices=("spectral", "random"), default="spectral")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--power-iters", type=int, default=150)
    p.add_argument("--format", choices=("csv", "json", "svg"), default="csv")
    p.add_argument("--no-timing", action="store_true",
                   help="leave wall-time cells empty for byte-reproducible output")
    p.add_argument("--out", required=True, metavar="PATH")

    p = sub.add_parser("success-rate", help="noise-free recovery success sweep")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--s", type=int, default=10)
    p.add_argument("--ratio-grid", type=_parse_ratio_grid,
                   default=(2, 3, 4, 5, 6, 7, 8, 9, 10), metavar="R1,R2,...")
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--init", choices=("spectral", "random", "both"), default="both")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threshold", type=float, default=1e-5,
                   help="success threshold on the final pair error")
    p.add_argument("--format", choices=("csv", "json", "svg"), default="csv")
    p.add_argument("--no-timing", action="store_true",
                   help="leave wall-time cells empty for byte-reproducible output")
    p.add_argument("--out", required=True, metavar="PATH")
    _add_refine_flags(p, sweep=True)
    return parser


def _cmd_simulate(args) -> int:
    n = args.n if args.n is not None else (2 * args.m if args.mode == "convolutional" else args.m)
    rng = SeededRng(args.seed)
    instance = synthesize_instance(n, args.k, args.s, args.m, args.mode, rng.derive("instance"))
    clean = forward_intensities(instance.bhat, instance.chat, instance.g_true, instance.z_true)
    noise_std = 0.0 if args.snr is None else noise_std_for_snr(clean, args.snr)
    measured = add_noise(clean, noise_std, rng.derive("noise"))
    save_instance(instance, measured, args.out)
    print(f"wrote {args.mode} instance (n={n}, k={args.k}, s={args.s}, m={args.m}) to {args.out}")
    return EXIT_OK


def _cmd_recover(args) -> int:
    config = _refine_config(args, args.seed)
    report = recover_from_file(
        args.instance,
        config=config,
        out_path=args.out,
        init_mode=args.init,
        init_iters=args.power_iters,
    )
    line = f"stop={report['stop_reason']} iterations={report['iterations']}"
    if "pair_error" in report:
        line += f" pair_error={report['pair_error']:.3e}"
    print(line)
    if args.out:
        print(f"wrote recovery report to {args.out}")
    return EXIT_OK


def _cmd_init_quality(args) -> int:
    config = ExperimentConfig(
        k=args.k,
        s=args.s,
        ratios=args.ratio_grid,
        snrs=args.snr_list,
        trials=args.trials,
        init_modes=(args.init,),
        power_iters=args.power_iters,
        master_seed=args.seed,
    )
    report = experiment_init_quality(config)
    emit_report(report, args.format, args.out, include_timing=not args.no_timing)
    print(f"wrote {len(report.cells)} cells ({config.trials} trials each) to {args.out}")
    return EXIT_OK


def _cmd_success_rate(args) -> int:
    modes = ("spectral", "random") if args.init == "both" else (args.init,)
    config = ExperimentConfig(
        k=args.k,
        s=args.s,
        ratios=args.ratio_grid,
        snrs=(None,),
        trials=args.trials,
        init_modes=modes,
        refine=_refine_config(args, args.seed),
        power_iters=args.power_iters,
        master_seed=args.seed,
        success_threshold=args.threshold,
    )
    report = experiment_success_rate(config)
    emit_report(report, args.format, args.out, include_timing=not args.no_timing)
    print(f"wrote {len(report.cells)} cells ({config.trials} trials each) to {args.out}")
    return EXIT_OK


_COMMANDS = {
    "simulate": _cmd_simulate,
    "recover": _cmd_recover,
    "init-quality": _cmd_init_quality,
    "success-rate": _cmd_success_rate,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except (InstanceFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, DimensionError, DegenerateInputError, DegenerateSpectrumError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BliPhaSuError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
