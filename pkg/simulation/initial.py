"""
Initial States

Seeded samplers for formation states and rigid transforms of states.
"""

import logging
import math

import numpy as np

from formation.geometry import cross2, norm, unit
from models.errors import PreconditionViolated, SamplingFailed
from models.schemas import DEFAULT_SPREAD, FormationSpec, SE2Transform

logger = logging.getLogger(__name__)

MAX_ATTEMPTS = 1000
COLLINEAR_RESIDUAL = 1e-3


def min_separation(spread: float) -> float:
    return max(1.0, 1e-3 * spread)


def _pairwise(p: np.ndarray) -> np.ndarray:
    return norm(np.stack([p[0] - p[1], p[1] - p[2], p[2] - p[0]]))


def random_initial(
    seed: int, spec: FormationSpec, spread: float = DEFAULT_SPREAD
) -> np.ndarray:
    """
    Sample three well-separated, non-collinear agents.

    Args:
        seed: Seed of the generator; equal seeds give equal states
        spec: Formation the state is meant for
        spread: Side of the square box centred at the origin

    Returns:
        Positions of shape (3, 2)
    """
    if not spread > 0:
        raise PreconditionViolated(f"spread must be positive, got {spread}")

    rng = np.random.default_rng(seed)
    half = spread / 2.0
    separation = min_separation(spread)
    for attempt in range(1, MAX_ATTEMPTS + 1):
        p = rng.uniform(-half, half, size=(3, 2))
        if np.min(_pairwise(p)) <= separation:
            continue
        residual = float(cross2(unit(p[0] - p[1]), unit(p[1] - p[2])))
        if abs(residual) <= COLLINEAR_RESIDUAL:
            continue
        if attempt > 100:
            logger.warning(f"Seed {seed} needed {attempt} draws for spread {spread}")
        return p

    raise SamplingFailed(
        f"no admissible state after {MAX_ATTEMPTS} draws (seed={seed}, spread={spread})"
    )


def collinear_initial(
    seed: int, spec: FormationSpec, spread: float = DEFAULT_SPREAD
) -> np.ndarray:
    """Sample a straight chain with agent 2 between agents 1 and 3."""
    if not spread > 0:
        raise PreconditionViolated(f"spread must be positive, got {spread}")

    rng = np.random.default_rng(seed)
    heading = rng.uniform(-math.pi, math.pi)
    direction = np.array([math.cos(heading), math.sin(heading)])
    centre = rng.uniform(-spread / 4.0, spread / 4.0, size=2)
    separation = min_separation(spread)
    r1, r3 = separation + rng.uniform(0.1, 0.5, size=2) * spread
    return np.stack([centre + r1 * direction, centre, centre - r3 * direction])


def se2_apply(s: np.ndarray, g: SE2Transform) -> np.ndarray:
    """Move every agent by the rigid transform ``g``."""
    return g.apply(s)
