"""
Integrator Tests for Flexformation

Tests for the fixed-step Runge-Kutta integrator, sample recording and
abort handling.
"""

import math

import numpy as np
import pytest

from formation import dynamics
from models.errors import DegenerateVector, IntegrationAborted
from models.schemas import FormationSpec
from simulation.integrator import integrate, rk4_step, step_count


def decay(x: np.ndarray) -> np.ndarray:
    return -x


class TestRk4Step:
    """Test a single Runge-Kutta step."""

    def test_linear_decay_taylor_polynomial(self):
        """Test one step of x' = -x is the fourth-order Taylor polynomial."""
        h = 0.1
        expected = 1 - h + h**2 / 2 - h**3 / 6 + h**4 / 24
        result = rk4_step(decay, np.array([1.0]), h)[0]
        assert result == pytest.approx(expected, abs=1e-15)

    def test_shape_preserved(self):
        """Test stacked states keep their shape."""
        x = np.ones((4, 3, 2))
        assert rk4_step(decay, x, 0.01).shape == (4, 3, 2)


class TestRecording:
    """Test which steps are recorded."""

    def test_step_count_covers_horizon(self):
        """Test the step count rounds up to cover the horizon."""
        assert step_count(0.01, 1.0) == 100
        assert step_count(0.3, 1.0) == 4
        assert step_count(0.5, 0.5) == 1

    def test_records_start_interval_and_end(self):
        """Test t = 0, every N-th step and the final step are kept."""
        traj = integrate(decay, np.array([1.0]), 0.1, 1.05, record_every=4)
        assert list(traj.steps) == [0, 4, 8, 11]
        np.testing.assert_allclose(traj.times, [0.0, 0.4, 0.8, 1.1])
        assert len(traj) == 4

    def test_accuracy(self):
        """Test exponential decay is reproduced closely."""
        traj = integrate(decay, np.array([2.0]), 0.01, 5.0, record_every=100)
        assert traj.final[0] == pytest.approx(2.0 * math.exp(-5.0), rel=1e-9)

    def test_decay_reaches_inverse_e(self):
        """Test x' = -x from 1 over one second ends at exp(-1) within 1e-9."""
        traj = integrate(decay, np.array([1.0]), 0.01, 1.0)
        assert traj.final[0] == pytest.approx(0.36787944117144233, abs=1e-9)
        assert traj.times[-1] == pytest.approx(1.0)

    def test_zero_field_is_constant(self):
        """Test a vanishing field leaves every sample equal to the start."""
        x0 = np.array([[1.5, -2.0], [0.0, 3.0], [7.0, 7.0]])
        traj = integrate(np.zeros_like, x0, 0.01, 2.0, record_every=20)
        assert len(traj) == 11
        for sample in traj.samples:
            np.testing.assert_array_equal(sample, x0)

    def test_harmonic_oscillator_keeps_radius(self):
        """Test a planar rotation field drifts in radius by less than 1e-7."""

        def rotation(x: np.ndarray) -> np.ndarray:
            return np.array([-x[1], x[0]])

        traj = integrate(rotation, np.array([1.0, 0.0]), 0.01, 10.0, record_every=10)
        radius = np.hypot(traj.samples[:, 0], traj.samples[:, 1])
        assert np.max(np.abs(radius - 1.0)) < 1e-7

    def test_fourth_order_convergence(self):
        """Test halving the step cuts the error by about sixteen."""
        spec = FormationSpec(d1=30, d2=10, c=1.0)
        x0 = np.array([[0.0, 0.0], [25.0, 5.0], [30.0, -5.0]])
        field = dynamics.velocity_field(spec)
        reference = integrate(field, x0, 0.0025, 2.0, 800).final
        coarse = np.max(np.abs(integrate(field, x0, 0.04, 2.0, 50).final - reference))
        fine = np.max(np.abs(integrate(field, x0, 0.02, 2.0, 100).final - reference))
        assert 8.0 <= coarse / fine <= 32.0

    @pytest.mark.parametrize(
        "dt,horizon,record_every", [(0.0, 1.0, 1), (0.1, 0.05, 1), (0.1, 1.0, 0)]
    )
    def test_invalid_settings(self, dt, horizon, record_every):
        """Test invalid step, horizon or stride are rejected."""
        with pytest.raises(ValueError):
            integrate(decay, np.array([1.0]), dt, horizon, record_every)


class TestAbort:
    """Test aborting when the field leaves its domain."""

    def test_abort_keeps_partial_trajectory(self):
        """Test the abort carries the time and the samples reached."""

        def collapsing(x: np.ndarray) -> np.ndarray:
            if x[0] > 0.32:
                raise DegenerateVector(0.0)
            return np.ones_like(x)

        with pytest.raises(IntegrationAborted) as exc_info:
            integrate(collapsing, np.array([0.0]), 0.1, 1.0, record_every=2)

        aborted = exc_info.value
        assert aborted.time == pytest.approx(0.3)
        assert isinstance(aborted.__cause__, DegenerateVector)
        assert list(aborted.partial.steps) == [0, 2, 3]
        assert aborted.partial.final[0] == pytest.approx(0.3)

    def test_coincident_agents_abort(self):
        """Test a formation started on top of itself aborts immediately."""
        x0 = np.array([[0.0, 0.0], [0.0, 0.0], [10.0, 0.0]])
        field = dynamics.velocity_field(FormationSpec(d1=30, d2=10, c=1.0))
        with pytest.raises(IntegrationAborted) as exc_info:
            integrate(field, x0, 0.01, 1.0)
        assert exc_info.value.time == 0.0
        assert len(exc_info.value.partial) == 1


if __name__ == "__main__":
    pytest.main([__file__])
