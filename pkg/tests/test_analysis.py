"""
Analysis Tests for Flexformation

Tests for the closed-form Jacobians, the 3x3 eigenvalue solver, Hurwitz
verdicts, the bordered-matrix eigenvalue estimate and equilibrium
classification.
"""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from formation import analysis, dynamics
from formation.geometry import rotate
from models.errors import PreconditionViolated, SingularAngle
from models.schemas import EquilibriumKind, FormationSpec, StabilityReport, Variant


def spec_at(theta: float, c: float, d1: float = 30.0, d2: float = 10.0):
    return FormationSpec(
        d1=d1, d2=d2, theta=theta, c=c, variant=Variant.ROTATED_SPLIT
    )


def closest(values: np.ndarray, target: complex) -> float:
    return float(np.min(np.abs(values - target)))


class TestCollinearJacobian:
    """Test the linearization of the collinear error system."""

    @pytest.mark.parametrize("c", [1.0, -1.0, 0.25, 3.0])
    def test_eigenvalues_factor(self, c):
        """Test the spectrum is {-1, -3, -2ca}."""
        values = analysis.eig3(analysis.jacobian_collinear(30.0, 10.0, c))
        for target in analysis.collinear_eigenvalues(30.0, 10.0, c):
            assert closest(values, target) < 1e-10

    def test_zero_gain_is_marginal(self):
        """Test c = 0 leaves an exact zero eigenvalue and no Hurwitz verdict."""
        report = analysis.is_hurwitz(analysis.jacobian_collinear(30.0, 10.0, 0.0))
        assert report.max_real == 0.0
        assert not report.hurwitz
        assert closest(report.eigenvalues, -1.0) < 1e-12
        assert closest(report.eigenvalues, -3.0) < 1e-12

    def test_sign_of_gain_decides_stability(self):
        """Test positive gains are stable and negative gains unstable."""
        assert analysis.is_hurwitz(analysis.jacobian_collinear(30, 10, 1.0)).hurwitz
        unstable = analysis.jacobian_collinear(30, 10, -1.0)
        assert not analysis.is_hurwitz(unstable).hurwitz

    def test_charpoly_matches_factored_form(self):
        """Test the characteristic polynomial is (l+1)(l+3)(l+2ca)."""
        m = analysis.jacobian_collinear(5.0, 50.0, 0.7)
        np.testing.assert_allclose(
            analysis.charpoly3(m), analysis.collinear_charpoly(5.0, 50.0, 0.7)
        )

    def test_matches_finite_differences(self):
        """Test the closed form against central differences of the field."""
        spec = FormationSpec(d1=30, d2=10, c=1.0)
        fd = analysis.fd_jacobian(dynamics.collinear_error_rates(spec), np.zeros(3))
        np.testing.assert_allclose(
            fd, analysis.jacobian_collinear(30, 10, 1.0), atol=1e-5
        )

    def test_dominant_rate(self):
        """Test the slowest decay rate is min(1, 2ca)."""
        assert analysis.dominant_rate(30, 10, 1.0) == pytest.approx(0.8 / 3)
        assert analysis.dominant_rate(1, 1, 5.0) == 1.0
        rate = -np.max(analysis.eig3(analysis.jacobian_collinear(30, 10, 1.0)).real)
        assert rate == pytest.approx(analysis.dominant_rate(30, 10, 1.0))


class TestPartials:
    """Test the chain-rule factors of the rotated bias."""

    @pytest.mark.parametrize("theta", [-2.9, -1.0, -0.1, 0.1, 1.0, 2.9])
    def test_closing_side_factor_positive(self, theta):
        """Test a3 > 0 for the split rotation at every angle."""
        assert analysis.partials_a(30.0, 10.0, theta, theta / 2)[2] > 0

    def test_unrotated_factors(self):
        """Test alpha = 0 gives the collinear factors at theta = 0."""
        a1, a2, a3 = analysis.partials_a(30.0, 10.0, 0.0, 0.0)
        a = analysis.link_gain(30.0, 10.0)
        assert (a1, a2, a3) == pytest.approx((-a, -a, a))

    def test_split_limit_at_zero(self):
        """Test the split factors use their limit below the small-angle cutoff."""
        limit = analysis.partials_a(30.0, 10.0, 0.0, 0.0)
        half = analysis.partials_a(30.0, 10.0, 1e-8, 5e-9)
        assert half == pytest.approx(tuple(v / 2 for v in limit), rel=1e-6)

    def test_singular_angle(self):
        """Test other rotations are undefined near theta = 0."""
        with pytest.raises(SingularAngle):
            analysis.partials_a(30.0, 10.0, 1e-8, 0.3)


class TestRotatedJacobian:
    """Test the linearization of the rotated error system."""

    def test_zero_angle_is_collinear(self):
        """Test theta = 0 is answered by the collinear Jacobian."""
        np.testing.assert_array_equal(
            analysis.jacobian_rotated(30, 10, 0.0, 0.5),
            analysis.jacobian_collinear(30, 10, 0.5),
        )

    @pytest.mark.parametrize("degrees", [30, 60, 120, 150, -60, -150])
    def test_matches_finite_differences(self, degrees):
        """Test the closed form against central differences of the field."""
        theta = math.radians(degrees)
        fd = analysis.fd_jacobian(
            dynamics.rotated_error_rates(spec_at(theta, 0.1)), np.zeros(3)
        )
        np.testing.assert_allclose(
            fd, analysis.jacobian_rotated(30, 10, theta, 0.1), atol=1e-5
        )

    def test_triangle_is_hurwitz(self):
        """Test the 60 degree triangle with c = 0.1 is locally stable."""
        theta = math.radians(60)
        report = analysis.is_hurwitz(analysis.jacobian_rotated(30, 10, theta, 0.1))
        assert report.hurwitz
        slow = analysis.rotated_slow_rate(30, 10, theta, 0.1)
        assert slow == pytest.approx(0.1 * (4 / 30) * math.cos(theta / 2) / 1.5)
        assert -1.5 < report.max_real / slow < -0.5

    @pytest.mark.parametrize("d1,d2", [(30.0, 10.0), (1.0, 1.0), (5.0, 50.0)])
    def test_small_gain_sweep(self, d1, d2):
        """Test every angle of a 5 degree grid is stable for small c."""
        for theta in np.arange(-0.97 * math.pi, 0.97 * math.pi, math.pi / 36):
            theta = float(theta)
            m = analysis.jacobian_rotated(d1, d2, theta, 0.01)
            report = analysis.is_hurwitz(m)
            assert report.hurwitz, f"theta={theta:.4f}"
            if theta != 0.0:
                slow = analysis.rotated_slow_rate(d1, d2, theta, 0.01)
                assert report.max_real / slow < -0.5

    def test_negative_gain_is_unstable(self):
        """Test reversing the bias destabilizes the triangle."""
        report = analysis.is_hurwitz(
            analysis.jacobian_rotated(30, 10, math.radians(60), -0.1)
        )
        assert not report.hurwitz


class TestEig3:
    """Test the closed-form 3x3 eigenvalue solver."""

    def test_matches_numpy(self):
        """Test eig3 against numpy on random matrices."""
        rng = np.random.default_rng(7)
        for _ in range(200):
            m = rng.uniform(-5.0, 5.0, size=(3, 3))
            values = analysis.eig3(m)
            for target in np.linalg.eigvals(m):
                assert closest(values, target) < 1e-6

    def test_diagonal_matrix(self):
        """Test a diagonal matrix returns its sorted diagonal."""
        values = analysis.eig3(np.diag([2.0, -1.0, 0.5]))
        np.testing.assert_allclose(values, [-1.0, 0.5, 2.0], atol=1e-12)

    def test_complex_pair_is_conjugate(self):
        """Test complex eigenvalues come as exact conjugates."""
        m = np.array([[0.0, -2.0, 0.0], [2.0, 0.0, 0.0], [0.0, 0.0, -1.0]])
        values = analysis.eig3(m)
        assert values[0].real == pytest.approx(-1.0)
        assert values[1] == np.conj(values[2])
        assert abs(values[2]) == pytest.approx(2.0)

    def test_singular_matrix_keeps_exact_zero(self):
        """Test a singular matrix reports a zero eigenvalue exactly."""
        m = np.array([[1.0, 2.0, 3.0], [0.0, 1.0, 1.0], [0.0, 0.0, 0.0]])
        values = analysis.eig3(m)
        assert 0.0 in values.real


class TestHurwitz:
    """Test Hurwitz verdicts and margins."""

    def test_margin_tightens_verdict(self):
        """Test a required decay rate beyond the slowest mode fails."""
        m = analysis.jacobian_collinear(30, 10, 1.0)
        assert analysis.is_hurwitz(m, margin=0.1).hurwitz
        assert not analysis.is_hurwitz(m, margin=0.3).hurwitz

    def test_report_carries_parameters(self):
        """Test the report keeps its source parameters."""
        spec = spec_at(1.0, 0.1)
        m = analysis.jacobian_rotated(30, 10, 1.0, 0.1)
        report = analysis.is_hurwitz(m, params=spec)
        assert report.params == spec
        assert report.margin == report.max_real

    def test_inconsistent_report_rejected(self):
        """Test a verdict disagreeing with the margin is invalid."""
        with pytest.raises(ValidationError):
            StabilityReport(
                jacobian=np.eye(3),
                eigenvalues=np.ones(3, dtype=complex),
                max_real=1.0,
                margin=1.0,
                hurwitz=True,
            )


class TestBorderedEstimate:
    """Test the first-order estimate of the small eigenvalue."""

    def test_sign_agrees(self):
        """Test the estimate and the exact eigenvalue share their sign."""
        check = analysis.lemma1_check(2.0, 0.5, -1e-3, 1.0, 0.5)
        assert check.sign_agrees
        assert check.approx_lambda3 == pytest.approx(6e-4)
        assert check.exact_lambda3 == pytest.approx(6e-4, rel=0.05)

    def test_random_parameters(self):
        """Test the estimate over random admissible parameters."""
        rng = np.random.default_rng(3)
        for _ in range(200):
            p1 = rng.uniform(1.0, 3.0)
            p2 = rng.uniform(-0.5 * p1, 0.5 * p1)
            b, c = rng.uniform(-1.0, 2.0, size=2)
            if b + c <= 0.01:
                continue
            check = analysis.lemma1_check(p1, p2, -1e-3, b, c)
            assert check.sign_agrees and check.exact_lambda3 > 0

    def test_precondition(self):
        """Test p1 must dominate p2."""
        with pytest.raises(PreconditionViolated):
            analysis.lemma1_matrix(1.0, 2.0, 0.0, 1.0, 1.0)

    def test_border_too_large(self):
        """Test a border entry beyond the smallness bound is rejected."""
        with pytest.raises(PreconditionViolated):
            analysis.lemma1_check(2.0, 0.5, 1.0, 1.0, 0.5)

    def test_z_coefficients_need_positive_norms(self):
        """Test the frozen-error coefficient matrix rejects bad norms."""
        m = analysis.zdyn_coefficient_matrix(0.0, 30.0, 10.0, 1.0)
        np.testing.assert_allclose(m, [[1 / 30, 1 / 10], [1 / 30, 1 / 10]])
        with pytest.raises(PreconditionViolated):
            analysis.zdyn_coefficient_matrix(0.0, 0.0, 10.0, 1.0)


class TestTravellingLinearization:
    """Test the linearization at the travelling collinear point."""

    @pytest.mark.parametrize("c", [1.0, -1.0, 0.5, -0.5])
    def test_critical_eigenvalue_follows_gain(self, c):
        """Test the eigenvalue nearest zero has the sign of c."""
        m = analysis.jacobian_uu(FormationSpec(d1=30, d2=10, c=c))
        values = analysis.eig3(m)
        critical = values[np.argmin(np.abs(values))].real
        assert math.copysign(1.0, critical) == math.copysign(1.0, c)


class TestClassification:
    """Test equilibrium classification of end states."""

    def test_aligned_chain(self):
        """Test the aligned chain is the desired collinear set."""
        s = np.array([[0.0, 0.0], [30.0, 0.0], [40.0, 0.0]])
        result = analysis.classify_equilibrium(s, FormationSpec(d1=30, d2=10, c=1.0))
        assert result.kind == EquilibriumKind.UD

    def test_travelling_chain(self):
        """Test the folded chain is the travelling set."""
        spec = FormationSpec(d1=30, d2=10, c=-1.0)
        result = analysis.classify_equilibrium(dynamics.uu_configuration(spec), spec)
        assert result.kind == EquilibriumKind.UU
        assert result.zeq_res < 1e-12

    def test_triangle(self):
        """Test the desired triangle is the rotated set."""
        spec = spec_at(math.radians(60), 0.1)
        z2_hat = rotate(spec.theta, np.array([1.0, 0.0]))
        s = np.array([[30.0, 0.0], [0.0, 0.0], list(-10.0 * z2_hat)])
        assert analysis.classify_equilibrium(s, spec).kind == EquilibriumKind.UTHETA

    def test_unbiased_flexible_set(self):
        """Test any shape with exact distances is flexible without bias."""
        spec = FormationSpec(d1=30, d2=10, variant=Variant.UNBIASED)
        z2_hat = rotate(1.1, np.array([1.0, 0.0]))
        s = np.array([[30.0, 0.0], [0.0, 0.0], list(-10.0 * z2_hat)])
        assert analysis.classify_equilibrium(s, spec).kind == EquilibriumKind.Z

    def test_moving_state(self):
        """Test a generic state is not an equilibrium."""
        s = np.array([[0.0, 0.0], [25.0, 5.0], [30.0, -5.0]])
        result = analysis.classify_equilibrium(s, FormationSpec(d1=30, d2=10, c=1.0))
        assert result.kind == EquilibriumKind.NOT_EQUILIBRIUM
        assert result.field_norm > 1.0


if __name__ == "__main__":
    pytest.main([__file__])
