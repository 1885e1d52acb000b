"""Command-line entry point.

Usage:
    fefp run <config-file> [--seed N] [--output DIR] [--threads N]
             [--emit-plots]

Exit codes: 0 success, 2 configuration error, 3 numerical blow-up.
"""

from __future__ import annotations

import argparse
import os
import sys

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BLOWUP = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fefp",
        description="Stochastic particle solver for rarefied monatomic "
                    "gas flows with an entropic Fokker-Planck collision "
                    "model.")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a scenario described by a config file")
    run.add_argument("config", help="path to an INI-style configuration file")
    run.add_argument("--seed", type=int, default=None,
                     help="override the seed from the config file")
    run.add_argument("--output", default=None,
                     help="output directory (default: from config, else cwd)")
    run.add_argument("--threads", type=int, default=None,
                     help="cap the number of BLAS threads")
    run.add_argument("--emit-plots", action="store_true",
                     help="render figures next to the delimited output")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads is not None:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                    "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
            os.environ[var] = str(args.threads)

    # import after the thread caps so BLAS picks them up
    from .config import ConfigError, load_config
    from .scenarios import BlowUpError, run_scenario

    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.seed is not None:
        cfg.seed = args.seed
    output_dir = args.output or cfg.output_dir

    try:
        result = run_scenario(cfg, output_dir=output_dir)
    except BlowUpError as exc:
        print(f"error: simulation blew up: {exc}", file=sys.stderr)
        return EXIT_BLOWUP

    written = [p for p in (getattr(result, "csv_path", None),
                           getattr(result, "fields_path", None),
                           getattr(result, "slice_path", None)) if p]
    if args.emit_plots:
        from .plotting import render
        written += render(result, output_dir)
    for path in written:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
