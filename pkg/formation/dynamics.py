"""
Formation Dynamics

Controller laws for the three-agent, two-link formation and the closed-loop
vector fields in position space, mixed (z, e) space and error space.

Position arrays have shape (..., 3, 2), one row per agent. Error arrays have
shape (..., 3). All fields accept stacks so a batch of runs can be advanced
in a single call.
"""

import logging
import math
from typing import Callable, NamedTuple, Tuple

import numpy as np

from formation.geometry import cross2, dot2, norm, rotate, unit
from models.errors import InvalidErrorVec
from models.schemas import FormationSpec, Variant

logger = logging.getLogger(__name__)


class RelVectors(NamedTuple):
    """Link vectors z1 = p1 - p2, z2 = p2 - p3 and the closing side z3."""

    z1: np.ndarray
    z2: np.ndarray
    z3: np.ndarray


class ErrorVec(NamedTuple):
    """Distance errors of the two links and the closing side."""

    e1: float
    e2: float
    e3: float


class Velocities(NamedTuple):
    u1: np.ndarray
    u2: np.ndarray
    u3: np.ndarray


class MixedRates(NamedTuple):
    """Right-hand side of the mixed (z, e) system."""

    z1_dot: np.ndarray
    z2_dot: np.ndarray
    e1_dot: float
    e2_dot: float


class BiasTerms(NamedTuple):
    """Bias b = k1 W(alpha) z1_hat + k2 W(beta) z2_hat added to agent 2."""

    k1: float
    alpha: float
    k2: float
    beta: float


def bias_terms(spec: FormationSpec) -> BiasTerms:
    """Bias of the formation's variant in rotated-unit-vector form."""
    if spec.variant == Variant.UNBIASED:
        return BiasTerms(0.0, 0.0, 0.0, 0.0)
    if spec.variant == Variant.BIASED_COLLINEAR:
        mu1, mu2 = bias_pair(spec)
        return BiasTerms(mu1, 0.0, mu2, 0.0)
    if spec.variant == Variant.ROTATED_ONE_SIDED:
        return BiasTerms(1.0, spec.theta, -1.0, 0.0)
    half = spec.theta / 2
    return BiasTerms(spec.c, half, -spec.c, -half)


def bias_pair(spec: FormationSpec) -> Tuple[float, float]:
    """(mu1, mu2) of the collinear bias; (c, -c) unless given explicitly."""
    if spec.variant == Variant.UNBIASED:
        return 0.0, 0.0
    if spec.mu1 is not None:
        return spec.mu1, spec.mu2
    return spec.c, -spec.c


def effective_gain(spec: FormationSpec) -> float:
    return 0.0 if spec.variant == Variant.UNBIASED else spec.c


def d3_of(spec: FormationSpec) -> float:
    """Length of the closing side at the desired shape (law of cosines)."""
    return d3_from(spec.d1, spec.d2, spec.theta)


def d3_from(d1: float, d2: float, theta: float) -> float:
    if theta == 0.0:
        return d1 + d2
    return math.sqrt(max(d1 * d1 + d2 * d2 + 2 * d1 * d2 * math.cos(theta), 0.0))


def relative_vectors(s: np.ndarray) -> RelVectors:
    s = np.asarray(s, dtype=float)
    p1, p2, p3 = s[..., 0, :], s[..., 1, :], s[..., 2, :]
    return RelVectors(p1 - p2, p2 - p3, p3 - p1)


def distance_errors(s: np.ndarray, spec: FormationSpec) -> ErrorVec:
    """e_k = |z_k| - d_k with d3 = d3_of(spec)."""
    z = relative_vectors(s)
    return ErrorVec(
        _scalar(norm(z.z1) - spec.d1),
        _scalar(norm(z.z2) - spec.d2),
        _scalar(norm(z.z3) - d3_of(spec)),
    )


def shape_potential(s: np.ndarray, spec: FormationSpec):
    """Sum over both links of 0.5 * (|z_k| - d_k)^2."""
    z = relative_vectors(s)
    # rejects coincident agents
    unit(z.z1), unit(z.z2)
    e1 = norm(z.z1) - spec.d1
    e2 = norm(z.z2) - spec.d2
    return _scalar(0.5 * (e1 * e1 + e2 * e2))


def _bias(zh1: np.ndarray, zh2: np.ndarray, terms: BiasTerms) -> np.ndarray:
    k1, alpha, k2, beta = terms
    return k1 * rotate(alpha, zh1) + k2 * rotate(beta, zh2)


def velocity_field(spec: FormationSpec) -> Callable[[np.ndarray], np.ndarray]:
    """Closed-loop position field of the formation's variant, p -> p_dot."""
    terms = bias_terms(spec)

    def field(s: np.ndarray) -> np.ndarray:
        z = relative_vectors(s)
        zh1, zh2 = unit(z.z1), unit(z.z2)
        e1 = (norm(z.z1) - spec.d1)[..., None]
        e2 = (norm(z.z2) - spec.d2)[..., None]
        u1 = -zh1 * e1
        u3 = zh2 * e2
        u2 = zh1 * e1 - zh2 * e2 + _bias(zh1, zh2, terms)
        return np.stack([u1, u2, u3], axis=-2)

    return field


def _split(v: np.ndarray) -> Velocities:
    return Velocities(v[..., 0, :], v[..., 1, :], v[..., 2, :])


def control_unbiased(s: np.ndarray, spec: FormationSpec) -> Velocities:
    """Gradient descent of the shape potential."""
    return _split(velocity_field(spec.copy(update={"variant": Variant.UNBIASED}))(s))


def control_biased(
    s: np.ndarray, mu1: float, mu2: float, spec: FormationSpec
) -> Velocities:
    """Gradient descent with biases mu1 z1_hat + mu2 z2_hat on agent 2."""
    biased = spec.copy(
        update={"variant": Variant.BIASED_COLLINEAR, "mu1": mu1, "mu2": mu2}
    )
    return _split(velocity_field(biased)(s))


def control_rotated(s: np.ndarray, spec: FormationSpec) -> Velocities:
    """Rotation-matrix bias steering the inter-link angle to theta.

    The one-sided variant uses W(theta) z1_hat - z2_hat with unit gain; every
    other variant is evaluated in the split form c (W(theta/2) z1_hat -
    W(theta/2)^T z2_hat).
    """
    if spec.variant != Variant.ROTATED_ONE_SIDED:
        spec = spec.copy(update={"variant": Variant.ROTATED_SPLIT})
    return _split(velocity_field(spec)(s))


def control(s: np.ndarray, spec: FormationSpec) -> Velocities:
    """Velocities under the formation's own variant."""
    return _split(velocity_field(spec)(s))


def shape_velocity(s: np.ndarray, spec: FormationSpec) -> np.ndarray:
    """(z1_dot, z2_dot) under the formation's variant, shape (..., 2, 2)."""
    u = velocity_field(spec)(s)
    return np.stack([u[..., 0, :] - u[..., 1, :], u[..., 1, :] - u[..., 2, :]], -2)


def error_field_mixed(
    z1: np.ndarray, z2: np.ndarray, e1: float, e2: float, c: float
) -> MixedRates:
    """Link and error rates with the errors treated as free coordinates."""
    zh1, zh2 = unit(z1), unit(z2)
    cos_g = dot2(zh1, zh2)
    z1_dot = -2 * zh1 * e1 + zh2 * e2 - c * zh1 + c * zh2
    z2_dot = -2 * zh2 * e2 + zh1 * e1 + c * zh1 - c * zh2
    e1_dot = -2 * e1 + cos_g * e2 - c + c * cos_g
    e2_dot = -2 * e2 + cos_g * e1 - c + c * cos_g
    return MixedRates(z1_dot, z2_dot, _scalar(e1_dot), _scalar(e2_dot))


def _error_norms(x: np.ndarray, d1: float, d2: float, d3: float):
    n1 = x[..., 0] + d1
    n2 = x[..., 1] + d2
    n3 = x[..., 2] + d3
    for k, n in enumerate((n1, n2, n3), start=1):
        shortest = np.min(n)
        if shortest <= 0:
            raise InvalidErrorVec(k, float(shortest))
    return n1, n2, n3


def law_of_cosines(n1, n2, n3):
    """z1_hat . z2_hat from the three side lengths."""
    return (n3 * n3 - n1 * n1 - n2 * n2) / (2 * n1 * n2)


def gamma_of_e(e, spec: FormationSpec):
    """Unsigned inter-link angle implied by an error vector, in [0, pi]."""
    x = np.asarray(e, dtype=float)
    n1, n2, n3 = _error_norms(x, spec.d1, spec.d2, d3_of(spec))
    f = law_of_cosines(n1, n2, n3)
    excess = float(np.max(np.abs(f))) - 1.0
    if excess > 1e-9:
        logger.warning(f"Law-of-cosines quotient exceeds 1 by {excess:.3e}; clamped")
    return _scalar(np.arccos(np.clip(f, -1.0, 1.0)))


def collinear_error_rates(spec: FormationSpec) -> Callable[[np.ndarray], np.ndarray]:
    """Self-contained error field for the collinear (theta = 0) closed loop."""
    mu1, mu2 = bias_pair(spec)
    d1, d2 = spec.d1, spec.d2
    d3 = d1 + d2

    def field(x: np.ndarray) -> np.ndarray:
        n1, n2, n3 = _error_norms(x, d1, d2, d3)
        f = law_of_cosines(n1, n2, n3)
        e1, e2 = x[..., 0], x[..., 1]
        e1_dot = -2 * e1 + f * e2 - (mu1 + mu2 * f)
        e2_dot = -2 * e2 + f * e1 + (mu1 * f + mu2)
        e3_dot = -((n1 + n2 * f) * e1 + (n2 + n1 * f) * e2) / n3
        return np.stack([e1_dot, e2_dot, e3_dot], axis=-1)

    return field


def rotated_error_rates(spec: FormationSpec) -> Callable[[np.ndarray], np.ndarray]:
    """Self-contained error field for any bias.

    Evaluated on the branch sign(gamma) = sign(theta).
    """
    k1, alpha, k2, beta = bias_terms(spec)
    d1, d2, d3 = spec.d1, spec.d2, d3_of(spec)
    branch = -1.0 if spec.theta < 0 else 1.0

    def field(x: np.ndarray) -> np.ndarray:
        n1, n2, n3 = _error_norms(x, d1, d2, d3)
        cos_g = np.clip(law_of_cosines(n1, n2, n3), -1.0, 1.0)
        gamma_s = branch * np.arccos(cos_g)
        e1, e2 = x[..., 0], x[..., 1]
        along1 = k1 * math.cos(alpha) + k2 * np.cos(gamma_s + beta)
        along2 = k1 * np.cos(gamma_s - alpha) + k2 * math.cos(beta)
        e1_dot = -2 * e1 + cos_g * e2 - along1
        e2_dot = -2 * e2 + cos_g * e1 + along2
        e3_dot = -((n1 + n2 * cos_g) * e1 + (n2 + n1 * cos_g) * e2) / n3
        return np.stack([e1_dot, e2_dot, e3_dot], axis=-1)

    return field


def error_field(spec: FormationSpec) -> Callable[[np.ndarray], np.ndarray]:
    """Error-space field matching the formation's variant."""
    if spec.variant.rotated:
        return rotated_error_rates(spec)
    return collinear_error_rates(spec)


def error_field_collinear(e, spec: FormationSpec) -> ErrorVec:
    return ErrorVec(*_unpack(collinear_error_rates(spec)(np.asarray(e, dtype=float))))


def error_field_rotated(e, spec: FormationSpec) -> ErrorVec:
    if not spec.variant.rotated:
        spec = spec.copy(update={"variant": Variant.ROTATED_SPLIT})
    return ErrorVec(*_unpack(rotated_error_rates(spec)(np.asarray(e, dtype=float))))


def closing_side_rate(s: np.ndarray, spec: FormationSpec):
    """e3_dot = z3_hat . z1_hat e1 + z3_hat . z2_hat e2 from an actual state."""
    z = relative_vectors(s)
    zh1, zh2, zh3 = unit(z.z1), unit(z.z2), unit(z.z3)
    e = distance_errors(s, spec)
    return _scalar(dot2(zh3, zh1) * e.e1 + dot2(zh3, zh2) * e.e2)


def uu_error_point(spec: FormationSpec) -> ErrorVec:
    """Travelling collinear equilibrium in error coordinates (d3 = d1 + d2)."""
    e = -2 * effective_gain(spec) / 3
    return ErrorVec(e, e, abs(spec.d1 - spec.d2) - (spec.d1 + spec.d2))


def uu_configuration(spec: FormationSpec, heading: float = 0.0) -> np.ndarray:
    """A folded chain on the travelling set, agent 2 at the origin.

    ``heading`` is the direction of z1_hat; agents 1 and 3 sit on that side.
    """
    e = -2 * effective_gain(spec) / 3
    direction = np.array([math.cos(heading), math.sin(heading)])
    p2 = np.zeros(2)
    return np.stack(
        [p2 + (spec.d1 + e) * direction, p2, p2 + (spec.d2 + e) * direction]
    )


def travelling_velocity(spec: FormationSpec, z1_hat: np.ndarray) -> np.ndarray:
    """Common agent velocity on the travelling set, (2c/3) z1_hat."""
    return 2 * effective_gain(spec) / 3 * unit(z1_hat)


def inter_link_angle(s: np.ndarray):
    """Signed angle from z1_hat to z2_hat and the collinearity residual."""
    z = relative_vectors(s)
    zh1, zh2 = unit(z.z1), unit(z.z2)
    cross = cross2(zh1, zh2)
    angle = np.arctan2(cross, dot2(zh1, zh2))
    return np.where(angle <= -np.pi, np.pi, angle), cross


def _unpack(x: np.ndarray):
    return tuple(_scalar(x[..., k]) for k in range(3))


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x
