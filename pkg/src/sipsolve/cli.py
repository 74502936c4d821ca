"""Command-line entry point.

Subcommands cover the synthetic studies and the oracle check suite::

    sipsolve flr|flr-step|flr-classify|deconv|check
        [--config PATH] [--out DIR] [--seed N] [--replicates N]
        [--jobs N] [--set key.path=value ...]

Exit codes: 0 success, 1 check failure, 2 configuration error, 3 runtime
error.
"""

from __future__ import annotations

import argparse
import sys

from .config import EXPERIMENTS, ConfigError, load_config
from .experiments import run_experiment


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sipsolve",
        description="Stochastic-gradient solvers for linear statistical "
                    "inverse problems: synthetic experiments and checks.",
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", default=None,
                       help="JSON config or manifest file")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="master seed")
        p.add_argument("--replicates", type=int, default=None,
                       help="number of replicates")
        p.add_argument("--jobs", type=int, default=None,
                       help="concurrent replicate workers")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="KEY=VALUE",
                       help="override a config field by dotted path")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(
            args.experiment,
            config_path=args.config,
            set_overrides=args.overrides,
            out_dir=args.out,
            seed=args.seed,
            replicates=args.replicates,
            jobs=args.jobs,
        )
        return run_experiment(config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - runtime failures map to exit 3
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
