"""
Analyze Command

Prints the error-system Jacobian at the desired shape, its eigenvalues and
the Hurwitz verdict for one parameter point.
"""

import argparse
import logging
import math

from cli.output import format_eigenvalues, format_matrix, output_dir, write_report
from formation import analysis
from models.schemas import ExitCode, FormationSpec, Variant

logger = logging.getLogger(__name__)


def add_shape_arguments(parser: argparse.ArgumentParser) -> None:
    for name, link in (("--d1", 1), ("--d2", 2)):
        parser.add_argument(
            name, type=float, required=True, help=f"desired length of link {link}"
        )
    parser.add_argument("--c", type=float, required=True, help="bias gain")


def register(subparsers) -> None:
    parser = subparsers.add_parser("analyze", help="linear stability at one point")
    add_shape_arguments(parser)
    angle = parser.add_mutually_exclusive_group()
    angle.add_argument("--theta", type=float, default=None, help="angle in radians")
    angle.add_argument("--theta-deg", type=float, default=None, help="angle in degrees")
    parser.add_argument(
        "--margin", type=float, default=0.0, help="required decay rate for Hurwitz"
    )
    parser.set_defaults(handler=execute)


def execute(args: argparse.Namespace) -> int:
    if args.theta is not None:
        theta = args.theta
    else:
        theta = math.radians(args.theta_deg or 0.0)
    variant = Variant.BIASED_COLLINEAR if theta == 0.0 else Variant.ROTATED_SPLIT
    spec = FormationSpec(d1=args.d1, d2=args.d2, theta=theta, c=args.c, variant=variant)
    logger.debug(f"Analyzing {spec}")

    jacobian = analysis.jacobian_rotated(spec.d1, spec.d2, spec.theta, spec.c)
    report = analysis.is_hurwitz(jacobian, margin=args.margin, params=spec)

    print(
        f"jacobian (d1={spec.d1:g}, d2={spec.d2:g}, theta={theta:.6g}, "
        f"c={spec.c:g}):"
    )
    print(format_matrix(report.jacobian))
    if theta == 0.0:
        closed = analysis.collinear_eigenvalues(spec.d1, spec.d2, spec.c)
        print(f"closed-form roots: {format_eigenvalues(closed)}")
    print(f"eigenvalues: {format_eigenvalues(report.eigenvalues)}")
    print(f"max real part: {report.max_real:.6g}")
    print(f"hurwitz: {'true' if report.hurwitz else 'false'}")

    write_report(output_dir(args.out) / "analysis.json", report, meta={"theta": theta})
    return ExitCode.OK
