"""Command-line entry point.

Subcommands: run-pe, run-cpe, run-pair, sweep, verify.  Every command reads
a JSON configuration (``--config``); ``--out`` overrides the output
directory, ``--eps`` overrides the Mach number for single-run commands, and
``--quiet`` suppresses progress output.
"""

from __future__ import annotations

import argparse
import os
import sys

from .errors import SlabflowError
from .harness import (
    ExperimentConfig,
    load_config,
    run_cpe,
    run_pair,
    run_pe,
    run_sweep,
    run_verification,
    write_pair_csv,
    write_rows_csv,
    write_sweep_outputs,
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slabflow",
        description=(
            "Pseudo-spectral primitive-equation solvers on a periodic slab "
            "with a low-Mach-number convergence harness."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("run-pe", "run the incompressible solver and write its time series"),
        ("run-cpe", "run the compressible solver and write its time series"),
        ("run-pair", "run both solvers at one Mach number and write the paired report"),
        ("sweep", "run the full Mach-number sweep with rate fits and plots"),
        ("verify", "run the invariant verification suite"),
    ):
        cmd = sub.add_parser(name, help=text)
        cmd.add_argument(
            "--config",
            required=(name != "verify"),
            help="path to the JSON experiment configuration",
        )
        cmd.add_argument("--out", help="output directory (overrides the configuration)")
        cmd.add_argument(
            "--eps", type=float, help="Mach number override for single-run commands"
        )
        cmd.add_argument("--quiet", action="store_true", help="suppress progress output")
    return parser


def _say(quiet: bool, message: str) -> None:
    if not quiet:
        print(message)


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except SlabflowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _dispatch(args: argparse.Namespace) -> int:
    if args.config is not None:
        config = load_config(args.config)
    else:
        config = ExperimentConfig()
    out_dir = args.out if args.out is not None else config.out_dir

    if args.command == "verify":
        results = run_verification(config)
        failed = [r for r in results if not r.passed]
        for r in results:
            _say(args.quiet, f"[{'PASS' if r.passed else 'FAIL'}] {r.name}: {r.detail}")
        _say(args.quiet, f"{len(results) - len(failed)}/{len(results)} checks passed")
        return 1 if failed else 0

    if args.command == "sweep":
        if args.eps is not None:
            raise SlabflowError(
                "--eps applies to single-run commands; edit eps_list for sweeps"
            )
        report = run_sweep(config)
        paths = write_sweep_outputs(config, report, out_dir)
        for path in paths:
            _say(args.quiet, f"wrote {path}")
        slope, _, r2 = report.fit_conv_v
        _say(args.quiet, f"fitted velocity-convergence slope {slope:.4f} (r2 = {r2:.4f})")
        for name, ok in report.passes.items():
            _say(args.quiet, f"[{'PASS' if ok else 'FAIL'}] {name}")
        return 0 if all(report.passes.values()) else 1

    eps = args.eps if args.eps is not None else config.eps_list[0]
    os.makedirs(out_dir, exist_ok=True)
    if args.command == "run-pe":
        rows = run_pe(config, eps)
        path = os.path.join(out_dir, "pe_run.csv")
        write_rows_csv(path, rows)
    elif args.command == "run-cpe":
        rows = run_cpe(config, eps)
        path = os.path.join(out_dir, f"cpe_run_eps_{eps:g}.csv")
        write_rows_csv(path, rows)
    elif args.command == "run-pair":
        reports = run_pair(config, eps)
        path = os.path.join(out_dir, f"pair_eps_{eps:g}.csv")
        write_pair_csv(path, reports)
    else:  # pragma: no cover - argparse restricts choices
        raise SlabflowError(f"unknown command {args.command}")
    _say(args.quiet, f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
