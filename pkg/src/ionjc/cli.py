"""Command-line front end.

Subcommands mirror the experiments (modes, resonance, sweep-rabi, evolve);
each takes a JSON config plus output overrides.  Exit codes: 0 success,
2 configuration error, 3 numerical-validation failure.
"""

from __future__ import annotations

import argparse
import os
import sys

from .config import ConfigError, parse_config
from .experiments import run_experiment, write_table

THREADS_ENV = "IONJC_THREADS"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ionjc",
        description="Trapped-ion Jaynes-Cummings experiments on truncated Fock spaces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, doc in (
        ("modes", "normal-mode table of the ion chain"),
        ("resonance", "corrected sideband-resonance report"),
        ("sweep-rabi", "Rabi-frequency sweep comparing both RWA flavours to the exact oracle"),
        ("evolve", "state-evolution time series"),
    ):
        p = sub.add_parser(name, help=doc)
        p.add_argument("--config", required=True, help="path to the JSON experiment config")
        p.add_argument("--out", default=None, help="output path (default: config output.path or stdout)")
        p.add_argument("--format", default=None, choices=("csv", "json"), help="output format")
        p.add_argument(
            "--threads",
            type=int,
            default=None,
            help=f"worker threads for sweeps (default: ${THREADS_ENV} or 1)",
        )
    return parser


def _thread_count(args) -> int:
    if args.threads is not None:
        n = args.threads
    else:
        try:
            n = int(os.environ.get(THREADS_ENV, "1"))
        except ValueError:
            raise ConfigError(f"${THREADS_ENV} must be an integer") from None
    if n < 1:
        raise ConfigError("thread count must be >= 1")
    return n


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        threads = _thread_count(args)
        cfg = parse_config(args.config)
        if cfg.experiment != args.command:
            raise ConfigError(
                f"config declares experiment {cfg.experiment!r} but the {args.command!r} subcommand was invoked"
            )
        table = run_experiment(cfg, threads=threads)
        out_path = args.out if args.out is not None else cfg.out_path
        fmt = args.format if args.format is not None else cfg.out_format
        if out_path is None:
            write_table(table, sys.stdout, fmt)
        else:
            with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
                write_table(table, fh, fmt)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except RuntimeError as exc:
        print(f"numerical validation failed: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
