"""
Sweep Command

Evaluates the rotated linearization over a grid of desired angles and
writes one CSV row per angle.
"""

import argparse
import logging
import math
from typing import Dict, List

import numpy as np

from cli.commands.analyze import add_shape_arguments
from cli.output import output_dir, write_sweep_csv
from formation import analysis
from models.schemas import ExitCode, FormationSpec

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("sweep-theta", help="Hurwitz verdict over theta")
    add_shape_arguments(parser)
    parser.add_argument(
        "--step", type=float, default=math.pi / 36, help="grid step in radians"
    )
    parser.set_defaults(handler=execute)


def theta_grid(step: float) -> np.ndarray:
    """Multiples of ``step`` strictly inside (-pi, pi), zero included."""
    count = math.floor(math.pi / step)
    if count * step >= math.pi - 1e-12:
        count -= 1
    return np.arange(-count, count + 1) * step


def sweep_theta(d1: float, d2: float, c: float, step: float) -> List[Dict]:
    """Hurwitz verdict of the rotated Jacobian at every grid angle."""
    if not step > 0:
        raise ValueError(f"step must be positive, got {step}")
    FormationSpec(d1=d1, d2=d2, c=c)
    rows = []
    for theta in theta_grid(step):
        theta = float(theta)
        # |theta| < step / 2 is only the zero row, answered by the collinear Jacobian
        if abs(theta) < step / 2:
            theta = 0.0
        report = analysis.is_hurwitz(analysis.jacobian_rotated(d1, d2, theta, c))
        rows.append(
            {"theta": theta, "max_real": report.max_real, "hurwitz": report.hurwitz}
        )
    return rows


def execute(args: argparse.Namespace) -> int:
    rows = sweep_theta(args.d1, args.d2, args.c, args.step)
    logger.info(f"Swept {len(rows)} angles")
    path = output_dir(args.out) / "sweep_theta.csv"
    write_sweep_csv(path, rows)
    stable = sum(1 for r in rows if r["hurwitz"])
    print(f"{stable}/{len(rows)} angles hurwitz; wrote {path}")
    return ExitCode.OK
