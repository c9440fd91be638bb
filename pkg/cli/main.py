"""
flexformation - Command Line Entry Point

Simulation and linear stability analysis of three-agent flexible formations
driven by biased range measurements. Parses arguments, configures logging
and dispatches to the subcommands.
"""

import argparse
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from cli.commands import analyze, figure, run, selftest, sweep
from models.errors import FormationError
from models.schemas import ExitCode

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR"]


class UsageError(Exception):
    """Raised instead of argparse's SystemExit(2) so usage errors exit 1."""


class Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = Parser(
        prog="flexformation",
        description="Three-agent flexible formation control with biased ranges",
    )
    parser.add_argument(
        "--out", default="out", help="artifact directory (default: out)"
    )
    parser.add_argument(
        "--log-level", default="INFO", choices=LOG_LEVELS, help="logging level"
    )
    parser.add_argument(
        "--verbose", action="store_true", help="shorthand for --log-level DEBUG"
    )

    subparsers = parser.add_subparsers(dest="command", parser_class=Parser)
    subparsers.required = True
    for command in (run, figure, analyze, sweep, selftest):
        command.register(subparsers)
    return parser


def configure_logging(level: str) -> None:
    logging.basicConfig(level=getattr(logging, level), format=LOG_FORMAT)
    logging.getLogger().setLevel(getattr(logging, level))


def main(argv: Optional[List[str]] = None) -> int:
    """Run the command line and return its exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(e, file=sys.stderr)
        return ExitCode.CONFIG_ERROR

    configure_logging("DEBUG" if args.verbose else args.log_level)
    logger.debug(f"Command {args.command}: {vars(args)}")

    try:
        return int(args.handler(args))
    except ValidationError as e:
        logger.error(f"Invalid parameters: {e}")
        print(f"error: invalid parameters\n{e}", file=sys.stderr)
        return ExitCode.CONFIG_ERROR
    except (FormationError, ValueError) as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return ExitCode.CONFIG_ERROR


if __name__ == "__main__":
    sys.exit(main())
