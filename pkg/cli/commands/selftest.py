"""
Selftest Command

Runs the invariant check suite and reports pass or fail per check.
"""

import argparse
import logging

from checks import suite
from models.schemas import ExitCode

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("selftest", help="run the invariant check suite")
    parser.add_argument(
        "--only", action="append", default=None, metavar="NAME", help="run one check"
    )
    parser.add_argument("--list", action="store_true", help="list check names")
    parser.set_defaults(handler=execute)


def execute(args: argparse.Namespace) -> int:
    if args.list:
        for name in suite.REGISTRY:
            print(name)
        return ExitCode.OK

    try:
        results = suite.run_checks(args.only)
    except KeyError as e:
        print(f"error: unknown check {e}")
        return ExitCode.CONFIG_ERROR

    for result in results:
        status = "PASS" if result.passed else "FAIL"
        print(f"{status} {result.name} ({result.seconds:.2f}s): {result.detail}")
    failed = [r.name for r in results if not r.passed]
    if failed:
        print(f"{len(failed)} of {len(results)} checks failed: {', '.join(failed)}")
        return ExitCode.SELFTEST_FAILED
    print(f"all {len(results)} checks passed")
    return ExitCode.OK
