"""
Figure Command

Runs one of the built-in reference scenarios and prints its summary.
"""

import argparse
import logging

from cli.commands.run import run_scenario
from cli.output import output_dir
from cli.presets import FIGURES, preset_scenario
from models.schemas import ExitCode

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("figure", help="run a built-in reference scenario")
    parser.add_argument("name", help=f"one of: {', '.join(FIGURES)}")
    parser.add_argument("--seed", type=int, default=0, help="initial-state seed")
    parser.add_argument("--horizon", type=float, default=None, help="override horizon")
    parser.add_argument("--dt", type=float, default=None, help="override step size")
    parser.add_argument(
        "--collinear-start",
        action="store_true",
        help="start from a straight chain instead of a random triangle",
    )
    parser.set_defaults(handler=execute)


def execute(args: argparse.Namespace) -> int:
    if args.name not in FIGURES:
        logger.error(f"Unknown figure '{args.name}'")
        print(f"error: unknown figure '{args.name}' (choose from {', '.join(FIGURES)})")
        return ExitCode.CONFIG_ERROR

    sc = preset_scenario(
        args.name,
        seed=args.seed,
        horizon=args.horizon,
        dt=args.dt,
        collinear_start=args.collinear_start,
    )
    logger.debug(f"Figure {args.name}: {sc.spec} dt={sc.dt} horizon={sc.horizon}")
    print(f"figure {args.name} (seed {args.seed}, horizon {sc.horizon:g}s)")
    artifacts = run_scenario(sc, output_dir(args.out), f"{args.name}-seed{args.seed}")
    return artifacts.exit_status
