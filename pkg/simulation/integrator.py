"""
Fixed-Step Integrator

Classical four-stage Runge-Kutta over numpy arrays of any shape, with
sampled recording and a typed trajectory container.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from models.errors import FieldDomainError, IntegrationAborted

logger = logging.getLogger(__name__)

Field = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class DerivedSignals:
    """Per-sample quantities derived from recorded positions."""

    errors: np.ndarray  # (N, 3) e1, e2, e3
    gamma: np.ndarray  # (N,) signed angle from z1_hat to z2_hat
    cross: np.ndarray  # (N,) cross2(z1_hat, z2_hat)
    speeds: np.ndarray  # (N, 3) per-agent speed


@dataclass(frozen=True)
class Trajectory:
    """Recorded samples of a run.

    ``samples[k]`` is the state at ``times[k]``, reached after ``steps[k]``
    integration steps of size ``dt``.
    """

    times: np.ndarray
    samples: np.ndarray
    steps: np.ndarray
    dt: float
    derived: Optional[DerivedSignals] = None

    def __len__(self) -> int:
        return len(self.times)

    @property
    def final(self) -> np.ndarray:
        return self.samples[-1]


def rk4_step(field: Field, x: np.ndarray, dt: float) -> np.ndarray:
    """One classical Runge-Kutta step of an autonomous field."""
    k1 = field(x)
    k2 = field(x + 0.5 * dt * k1)
    k3 = field(x + 0.5 * dt * k2)
    k4 = field(x + dt * k3)
    return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def step_count(dt: float, horizon: float) -> int:
    """Number of steps covering ``horizon``; the last step ends at or past it."""
    return max(1, int(np.ceil(horizon / dt - 1e-9)))


def integrate(
    field: Field, x0, dt: float, horizon: float, record_every: int = 1
) -> Trajectory:
    """
    Integrate ``field`` from ``x0`` with fixed steps.

    Args:
        field: State derivative, called as field(x)
        x0: Initial state array
        dt: Step size
        horizon: Simulated time
        record_every: Record one sample every this many steps

    Returns:
        Trajectory holding t = 0, every ``record_every``-th step and the final step

    Raises:
        IntegrationAborted: if the field leaves its domain; the partial
            trajectory ends at the last state reached
    """
    if dt <= 0 or horizon < dt or record_every < 1:
        raise ValueError(
            f"invalid integration settings dt={dt}, horizon={horizon}, "
            f"record_every={record_every}"
        )

    n_steps = step_count(dt, horizon)
    x = np.array(x0, dtype=float)
    recorded_steps = [0]
    recorded = [x.copy()]

    for step in range(1, n_steps + 1):
        try:
            x = rk4_step(field, x, dt)
        except FieldDomainError as exc:
            t = (step - 1) * dt
            if recorded_steps[-1] != step - 1:
                recorded_steps.append(step - 1)
                recorded.append(x.copy())
            partial = _build(recorded_steps, recorded, dt)
            logger.error(f"Integration aborted at t={t:.6g}: {exc}")
            message = f"aborted at t={t:.6g}: {exc}"
            raise IntegrationAborted(t, partial, message) from exc

        if step % record_every == 0 or step == n_steps:
            recorded_steps.append(step)
            recorded.append(x.copy())

    logger.debug(f"Integrated {n_steps} steps, recorded {len(recorded)} samples")
    return _build(recorded_steps, recorded, dt)


def _build(steps: list, samples: list, dt: float) -> Trajectory:
    steps_arr = np.asarray(steps, dtype=np.int64)
    return Trajectory(
        times=steps_arr * dt, samples=np.stack(samples), steps=steps_arr, dt=dt
    )
