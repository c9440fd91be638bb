"""
Built-in Scenarios

Parameters of the reference runs: the stationary and travelling collinear
formations and the 60 degree triangle. Horizons are long enough for the
slow angular mode to settle from any admissible random start.
"""

import math
from typing import Callable, Dict, Optional

from models.schemas import FormationSpec, Scenario, Variant

D1 = 30.0
D2 = 10.0

PRESET_STEPS = {
    "collinear-stationary": (0.01, 400.0),
    "collinear-moving": (0.01, 600.0),
    "triangle": (0.05, 4000.0),
    "unbiased": (0.01, 60.0),
}


def collinear_stationary_spec() -> FormationSpec:
    return FormationSpec(d1=D1, d2=D2, c=1.0, variant=Variant.BIASED_COLLINEAR)


def collinear_moving_spec() -> FormationSpec:
    return FormationSpec(d1=D1, d2=D2, c=-1.0, variant=Variant.BIASED_COLLINEAR)


def triangle_spec() -> FormationSpec:
    return FormationSpec(
        d1=D1, d2=D2, theta=math.radians(60.0), c=0.1, variant=Variant.ROTATED_SPLIT
    )


def unbiased_spec() -> FormationSpec:
    return FormationSpec(d1=D1, d2=D2, variant=Variant.UNBIASED)


SPECS: Dict[str, Callable[[], FormationSpec]] = {
    "collinear-stationary": collinear_stationary_spec,
    "collinear-moving": collinear_moving_spec,
    "triangle": triangle_spec,
    "unbiased": unbiased_spec,
}

# One-line summaries written at the top of generated scenario files
DESCRIPTIONS = {
    "collinear-stationary": (
        "Stationary collinear formation: positive bias gain, agents settle on a line"
    ),
    "collinear-moving": (
        "Travelling collinear formation: negative bias gain, "
        "the line drifts at 2/3 per second"
    ),
    "triangle": "Rotated split bias selecting a 60 degree triangle",
    "unbiased": (
        "No bias: distances converge, the inter-link angle stays wherever it lands"
    ),
}

# Names accepted by the figure command
FIGURES = ("collinear-stationary", "collinear-moving", "triangle")


def preset_scenario(
    name: str,
    seed: int = 0,
    horizon: Optional[float] = None,
    dt: Optional[float] = None,
    collinear_start: bool = False,
) -> Scenario:
    """Scenario of a named preset with optional horizon and step overrides."""
    if name not in SPECS:
        raise KeyError(name)
    default_dt, default_horizon = PRESET_STEPS[name]
    return Scenario(
        spec=SPECS[name](),
        dt=dt if dt is not None else default_dt,
        horizon=horizon if horizon is not None else default_horizon,
        record_every=10,
        seed=seed,
        collinear_start=collinear_start,
    )
