"""Command-line front end: ``adimaxwell {run,convergence,exponents,section7}``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import exponents as _exponents
from .harness import (
    ConfigError,
    builtin_section7,
    convergence_study,
    emit,
    fmt,
    format_exponent_report,
    load_config,
    with_overrides,
)
from .stepper import StepConfig, run

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2
EXIT_IO = 3

log = logging.getLogger("adimaxwell")


def _parse_triple(text: str) -> tuple[int, int, int]:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected nx,ny,nz, got {text!r}")
    try:
        return tuple(int(p) for p in parts)  # type: ignore[return-value]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected three integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adimaxwell",
        description="Peaceman-Rachford ADI solver for Maxwell's equations with piecewise constant media.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required: bool) -> None:
        p.add_argument("--config", type=Path, required=config_required, help="JSON experiment config")
        p.add_argument("--out", type=Path, help="output directory (overrides the config key)")

    p_run = sub.add_parser("run", help="single time integration with diagnostics")
    common(p_run, True)
    p_run.add_argument("--snapshots", action="store_true", help="write VTK snapshots of every record")

    p_conv = sub.add_parser("convergence", help="temporal convergence study")
    common(p_conv, True)
    p_conv.add_argument("--threads", type=int, default=1, help="parallel per-step-size runs")

    p_exp = sub.add_parser("exponents", help="singularity exponents of a material layout")
    common(p_exp, False)

    p_s7 = sub.add_parser("section7", help="order-reduction experiment on the unit cube")
    p_s7.add_argument("--out", type=Path, help="output directory")
    p_s7.add_argument("--threads", type=int, default=1)
    p_s7.add_argument("--scale", choices=("desk", "paper"), default="desk")
    p_s7.add_argument("--desk-n", type=_parse_triple, default=(48, 48, 24), help="desk grid nx,ny,nz")
    p_s7.add_argument("--homogeneous", action="store_true", help="use eps = 1 everywhere")
    return parser


def _cmd_run(args) -> int:
    config = with_overrides(load_config(args.config), output_dir=str(args.out) if args.out else None)
    grid = config.grid()
    material = config.material(grid)
    source = config.make_source()
    step = StepConfig(config.taus[0], config.t_final, config.record_every)
    traj = run(
        config.initial_state(grid, material),
        step,
        source,
        material,
        probes=("energy", "div_muH_l2"),
        keep_snapshots=True,
    )
    files = emit(traj, config.output_dir, source, material, snapshots=config.snapshots or args.snapshots)
    last = traj.diagnostics[-1]
    print(f"steps {traj.steps}  t_end {fmt(traj.end_time)}  energy {fmt(last['energy'])}")
    print(f"wrote {len(files)} file(s) to {config.output_dir} ({len(traj.times)} records)")
    return EXIT_OK


def _print_convergence(report) -> None:
    print(f"{'tau':>24}  {'error':>24}  {'pairwise_order':>24}")
    for t, e, p in zip(report.taus, report.errors, report.pairwise_orders):
        print(f"{fmt(t):>24}  {fmt(e):>24}  {fmt(p):>24}")
    print(f"fitted_order {fmt(report.fitted_order) or report.status}  knee_tau {fmt(report.knee_tau)}")
    print(f"reference {report.reference}")


def _cmd_convergence(args) -> int:
    config = with_overrides(load_config(args.config), output_dir=str(args.out) if args.out else None)
    report = convergence_study(config, threads=args.threads)
    _print_convergence(report)
    emit(report, config.output_dir)
    return EXIT_OK


def _cmd_exponents(args) -> int:
    config = load_config(args.config) if args.config else builtin_section7("desk", (8, 8, 8))
    rep = _exponents.report(config.material())
    print(format_exponent_report(rep))
    if args.out:
        emit(rep, args.out)
    return EXIT_OK


def _cmd_section7(args) -> int:
    config = builtin_section7(args.scale, args.desk_n, homogeneous=args.homogeneous)
    out = args.out or Path(config.output_dir) / config.name
    report = convergence_study(config, threads=args.threads)
    _print_convergence(report)
    emit(report, out)
    emit(_exponents.report(config.material()), out)
    return EXIT_OK


COMMANDS = {
    "run": _cmd_run,
    "convergence": _cmd_convergence,
    "exponents": _cmd_exponents,
    "section7": _cmd_section7,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (RuntimeError, ArithmeticError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
