"""cpi-sim command line interface.

    cpi-sim run <config-file> [--threads N] [--out DIR] [--seed S]
    cpi-sim validate <config-file>
    cpi-sim demo <name>

Output directory precedence: --out flag, then the CPI_SIM_OUT environment
variable, then run.out_dir from the config.

Exit codes: 0 success, 2 config error, 3 numerical error (under-resolved
grids, empty refocus overlap, degenerate statistics), 4 I/O error.
"""

from __future__ import annotations

import argparse
import os
import sys

from .config import DEMOS, parse_config
from .errors import (
    DegenerateStatistics,
    EmptyOverlap,
    InvalidGeometry,
    OutOfRange,
    ParseError,
    UnderResolved,
    ValidationError,
)
from .runner import run_experiment

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

_CONFIG_ERRORS = (ParseError, ValidationError, InvalidGeometry, ValueError)
_NUMERICAL_ERRORS = (UnderResolved, EmptyOverlap, DegenerateStatistics, OutOfRange)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cpi-sim",
        description="Chaotic-light correlation plenoptic imaging simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a configured experiment")
    run.add_argument("config", help="path to a config file")
    run.add_argument("--threads", type=int, default=None, help="worker threads")
    run.add_argument("--out", default=None, help="output directory")
    run.add_argument("--seed", type=int, default=None, help="override run.seed")

    val = sub.add_parser("validate", help="parse and validate a config file")
    val.add_argument("config", help="path to a config file")

    demo = sub.add_parser("demo", help="print a bundled demo config")
    demo.add_argument("name", choices=sorted(DEMOS), help="demo name")
    return parser


def _load_config(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "demo":
            sys.stdout.write(DEMOS[args.name])
            return EXIT_OK

        if args.command == "validate":
            config = _load_config(args.config)
            if config.mode != "budget" or config.get("geometry.z_a") is not None:
                config.build_geometry()
                config.build_source()
                config.build_mask()
                config.build_axes()
            sys.stdout.write(f"OK: {args.config} ({config.mode} mode)\n")
            return EXIT_OK

        config = _load_config(args.config)
        out_dir = args.out or os.environ.get("CPI_SIM_OUT") or None
        manifest = run_experiment(
            config, out_dir=out_dir, threads=args.threads, seed=args.seed
        )
        sys.stdout.write(
            f"wrote {len(manifest.files) + 1} files "
            f"({manifest.stage_seconds['total']:.2f} s)\n"
        )
        return EXIT_OK

    except _NUMERICAL_ERRORS as exc:
        sys.stderr.write(f"numerical error: {exc}\n")
        return EXIT_NUMERICAL
    except _CONFIG_ERRORS as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    except OSError as exc:
        sys.stderr.write(f"i/o error: {exc}\n")
        return EXIT_IO


if __name__ == "__main__":
    raise SystemExit(main())
