"""
Scenario Runner

Runs position-space and error-space scenarios, derives per-sample signals
and builds the convergence report from the trailing window of a run.
"""

import logging
import math
from dataclasses import replace
from typing import List, Sequence, Tuple

import numpy as np

from formation import analysis, dynamics
from formation.geometry import norm
from models.errors import PreconditionViolated
from models.schemas import ConvergenceReport, FormationSpec, Scenario
from simulation.initial import collinear_initial, random_initial
from simulation.integrator import DerivedSignals, Trajectory, integrate

logger = logging.getLogger(__name__)

# Fraction of the horizon averaged for steady-state values
STEADY_WINDOW = 0.1


def initial_state(sc: Scenario) -> np.ndarray:
    """Explicit positions, or a seeded sample when none are given."""
    if sc.initial is not None:
        return np.array(sc.initial, dtype=float)
    if sc.collinear_start:
        return collinear_initial(sc.seed, sc.spec, sc.spread)
    return random_initial(sc.seed, sc.spec, sc.spread)


def derive_signals(samples: np.ndarray, spec: FormationSpec) -> DerivedSignals:
    """Errors, signed angle, collinearity residual and speeds per sample."""
    e = dynamics.distance_errors(samples, spec)
    gamma, cross = dynamics.inter_link_angle(samples)
    speeds = norm(dynamics.velocity_field(spec)(samples))
    return DerivedSignals(
        errors=np.stack([e.e1, e.e2, e.e3], axis=-1),
        gamma=np.asarray(gamma),
        cross=np.asarray(cross),
        speeds=speeds,
    )


def steady_velocities(traj: Trajectory) -> np.ndarray:
    """Per-agent mean velocity over the trailing window, shape (3, 2)."""
    times = traj.times
    start = (1.0 - STEADY_WINDOW) * times[-1]
    first = min(int(np.searchsorted(times, start, side="left")), len(times) - 2)
    diffs = np.diff(traj.samples[first:], axis=0)
    intervals = np.diff(times[first:])
    return np.mean(diffs / intervals[:, None, None], axis=0)


def build_report(
    traj: Trajectory, spec: FormationSpec, tol: float
) -> ConvergenceReport:
    """Summarize a completed position-space run."""
    derived = traj.derived or derive_signals(traj.samples, spec)
    velocities = steady_velocities(traj) if len(traj) > 1 else np.zeros((3, 2))
    centroid = velocities.mean(axis=0)
    vx, vy = float(centroid[0]), float(centroid[1])
    z = dynamics.relative_vectors(traj.samples)
    link_lengths = np.minimum(norm(z.z1), norm(z.z2))
    final = traj.final
    zf = dynamics.relative_vectors(final)
    alignment = float(
        np.dot(zf.z1, zf.z2) / (float(norm(zf.z1)) * float(norm(zf.z2)))
    )

    return ConvergenceReport(
        final_time=float(traj.times[-1]),
        final_errors=tuple(float(v) for v in derived.errors[-1]),
        final_gamma=float(derived.gamma[-1]),
        link_alignment=alignment,
        steady_velocity=(vx, vy),
        steady_speed=math.hypot(vx, vy),
        agent_velocities=[(float(v[0]), float(v[1])) for v in velocities],
        agent_speeds=[math.hypot(float(v[0]), float(v[1])) for v in velocities],
        collinearity_residual=float(derived.cross[-1]),
        min_link_distance=float(np.min(link_lengths)),
        classified=analysis.classify_equilibrium(final, spec, tol),
    )


def simulate(sc: Scenario) -> Tuple[Trajectory, ConvergenceReport]:
    """Integrate the scenario's position-space closed loop."""
    x0 = initial_state(sc)
    logger.info(
        f"Simulating {sc.spec.variant.value} for {sc.horizon:g}s at dt={sc.dt:g}"
    )
    raw = integrate(
        dynamics.velocity_field(sc.spec), x0, sc.dt, sc.horizon, sc.record_every
    )
    traj = replace(raw, derived=derive_signals(raw.samples, sc.spec))
    report = build_report(traj, sc.spec, sc.classify_tol)
    logger.info(
        f"Finished at t={report.final_time:g}: {report.classified.kind.value}"
    )
    return traj, report


def simulate_batch(
    scenarios: Sequence[Scenario],
) -> List[Tuple[Trajectory, ConvergenceReport]]:
    """
    Integrate several scenarios as one stacked array.

    All scenarios must share spec, dt, horizon and record_every. A
    degenerate link in any member aborts the whole batch.
    """
    if not scenarios:
        return []
    first = scenarios[0]
    for sc in scenarios[1:]:
        if (sc.spec, sc.dt, sc.horizon, sc.record_every) != (
            first.spec,
            first.dt,
            first.horizon,
            first.record_every,
        ):
            raise PreconditionViolated(
                "batched scenarios must share spec, dt, horizon and record_every"
            )

    x0 = np.stack([initial_state(sc) for sc in scenarios])
    logger.info(f"Simulating batch of {len(scenarios)} for {first.horizon:g}s")
    stacked = integrate(
        dynamics.velocity_field(first.spec),
        x0,
        first.dt,
        first.horizon,
        first.record_every,
    )

    results = []
    for k, sc in enumerate(scenarios):
        samples = stacked.samples[:, k]
        traj = Trajectory(
            times=stacked.times,
            samples=samples,
            steps=stacked.steps,
            dt=stacked.dt,
            derived=derive_signals(samples, sc.spec),
        )
        results.append((traj, build_report(traj, sc.spec, sc.classify_tol)))
    return results


def simulate_errors(sc: Scenario) -> Trajectory:
    """Integrate the self-contained error system of the scenario's variant."""
    if sc.initial_errors is None:
        raise PreconditionViolated("error-space runs need initial_errors")
    logger.info(f"Simulating error system of {sc.spec.variant.value}")
    return integrate(
        dynamics.error_field(sc.spec),
        np.array(sc.initial_errors, dtype=float),
        sc.dt,
        sc.horizon,
        sc.record_every,
    )

