"""
Linear Stability Analysis

Closed-form Jacobians of the self-contained error systems, a 3x3
eigenvalue solver, Hurwitz verdicts, equilibrium classification and the
small-perturbation eigenvalue estimate for bordered 3x3 matrices.
"""

import logging
import math
from typing import Callable, NamedTuple, Optional, Tuple

import numpy as np

from formation import dynamics
from formation.geometry import dot2, norm, rotate, unit
from models.errors import PreconditionViolated, SingularAngle
from models.schemas import (
    DEFAULT_CLASSIFY_TOL,
    EquilibriumClass,
    EquilibriumKind,
    FormationSpec,
    StabilityReport,
    Variant,
)

logger = logging.getLogger(__name__)

# Below this |theta| the partials use their removable-singularity limits
SMALL_THETA = 1e-6
FD_STEP = 1e-6


class LemmaCheck(NamedTuple):
    approx_lambda3: float
    exact_lambda3: float
    sign_agrees: bool


def link_gain(d1: float, d2: float) -> float:
    """a = (d1 + d2) / (d1 d2)."""
    return (d1 + d2) / (d1 * d2)


def jacobian_collinear(d1: float, d2: float, c: float) -> np.ndarray:
    """Linearization of the collinear error system at e = 0."""
    ca = c * link_gain(d1, d2)
    return np.array(
        [
            [-2.0 - ca, 1.0 - ca, ca],
            [1.0 - ca, -2.0 - ca, ca],
            [-1.0, -1.0, 0.0],
        ]
    )


def collinear_eigenvalues(d1: float, d2: float, c: float) -> np.ndarray:
    """Closed-form roots of (l + 1)(l + 3)(l + 2ca)."""
    return np.array([-1.0, -3.0, -2.0 * c * link_gain(d1, d2)], dtype=complex)


def collinear_charpoly(d1: float, d2: float, c: float) -> np.ndarray:
    """Monic coefficients of (l + 1)(l + 3)(l + 2ca), highest power first."""
    k = 2.0 * c * link_gain(d1, d2)
    return np.array([1.0, 4.0 + k, 3.0 + 4.0 * k, 3.0 * k])


def dominant_rate(d1: float, d2: float, c: float) -> float:
    """Decay rate of the slowest collinear mode, min(1, 2ca).

    Negative for c < 0, where the slowest mode grows.
    """
    return min(1.0, 2.0 * c * link_gain(d1, d2))


def partials_a(
    d1: float, d2: float, theta: float, alpha: float
) -> Tuple[float, float, float]:
    """
    Chain-rule factors of the rotated bias with respect to (e1, e2, e3).

    Args:
        d1: Desired length of link 1
        d2: Desired length of link 2
        theta: Desired inter-link angle (radians)
        alpha: Rotation applied to z1_hat by the bias

    Returns:
        (a1, a2, a3) evaluated at e = 0

    Raises:
        SingularAngle: near theta = 0 unless alpha is 0 or theta / 2
    """
    if abs(theta) < SMALL_THETA:
        if alpha == 0.0:
            ratio = 1.0
        elif math.isclose(alpha, theta / 2, rel_tol=1e-12, abs_tol=1e-15):
            ratio = 1.0 / (2.0 * math.cos(theta / 2))
        else:
            raise SingularAngle(
                f"partials undefined at theta={theta:.3e} for alpha={alpha:.3e}"
            )
    else:
        ratio = math.sin(theta - alpha) / math.sin(theta)

    d3 = dynamics.d3_from(d1, d2, theta)
    d12 = d1 * d2
    a1 = -ratio * (d1 + d2 * math.cos(theta)) / d12
    a2 = -ratio * (d2 + d1 * math.cos(theta)) / d12
    a3 = ratio * d3 / d12
    return a1, a2, a3


def jacobian_rotated(d1: float, d2: float, theta: float, c: float) -> np.ndarray:
    """Linearization of the split rotated error system at e = 0.

    theta = 0 is answered by the collinear Jacobian.
    """
    if theta == 0.0:
        return jacobian_collinear(d1, d2, c)
    a1, a2, a3 = partials_a(d1, d2, theta, theta / 2)
    cos_t = math.cos(theta)
    d3 = dynamics.d3_from(d1, d2, theta)
    return np.array(
        [
            [-2.0 + c * a1, cos_t + c * a2, c * a3],
            [cos_t + c * a1, -2.0 + c * a2, c * a3],
            [-(d1 + d2 * cos_t) / d3, -(d2 + d1 * cos_t) / d3, 0.0],
        ]
    )


def rotated_slow_rate(d1: float, d2: float, theta: float, c: float) -> float:
    """First-order decay rate of the slow mode of the rotated linearization.

    c a cos(theta/2) / (2 - cos(theta)); it vanishes as |theta| approaches pi.
    """
    return c * link_gain(d1, d2) * math.cos(theta / 2) / (2.0 - math.cos(theta))


def fd_jacobian(
    field: Callable[[np.ndarray], np.ndarray], x0, h: float = FD_STEP
) -> np.ndarray:
    """Central-difference Jacobian of a batch-capable field at ``x0``."""
    x0 = np.asarray(x0, dtype=float)
    n = x0.shape[0]
    steps = h * np.eye(n)
    rates = field(np.concatenate([x0 + steps, x0 - steps]))
    return ((rates[:n] - rates[n:]) / (2.0 * h)).T


def jacobian_uu(spec: FormationSpec, h: float = FD_STEP) -> np.ndarray:
    """Finite-difference linearization at the travelling collinear point."""
    biased = spec.copy(update={"variant": Variant.BIASED_COLLINEAR, "theta": 0.0})
    point = np.array(dynamics.uu_error_point(biased))
    return fd_jacobian(dynamics.collinear_error_rates(biased), point, h)


def charpoly3(m: np.ndarray) -> np.ndarray:
    """Monic coefficients of det(l I - m), highest power first."""
    m = np.asarray(m, dtype=float)
    trace = m[0, 0] + m[1, 1] + m[2, 2]
    minors = (
        m[0, 0] * m[1, 1]
        - m[0, 1] * m[1, 0]
        + m[0, 0] * m[2, 2]
        - m[0, 2] * m[2, 0]
        + m[1, 1] * m[2, 2]
        - m[1, 2] * m[2, 1]
    )
    det = (
        m[0, 0] * (m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1])
        - m[0, 1] * (m[1, 0] * m[2, 2] - m[1, 2] * m[2, 0])
        + m[0, 2] * (m[1, 0] * m[2, 1] - m[1, 1] * m[2, 0])
    )
    return np.array([1.0, -trace, minors, -det])


def _polish(root: float, b: float, c: float, d: float, iterations: int = 4) -> float:
    """Newton refinement of a real root of l^3 + b l^2 + c l + d."""
    residual = abs(((root + b) * root + c) * root + d)
    for _ in range(iterations):
        slope = (3.0 * root + 2.0 * b) * root + c
        if slope == 0.0 or residual == 0.0:
            break
        candidate = root - (((root + b) * root + c) * root + d) / slope
        candidate_residual = abs(((candidate + b) * candidate + c) * candidate + d)
        if candidate_residual >= residual:
            break
        root, residual = candidate, candidate_residual
    return root


def eig3(m: np.ndarray) -> np.ndarray:
    """
    Eigenvalues of a real 3x3 matrix from its characteristic cubic.

    Three real roots come from the trigonometric form. Otherwise one real
    root comes from Cardano's formula and the remaining pair from the
    deflated quadratic, which makes complex pairs exact conjugates.

    Returns:
        Complex array of three eigenvalues sorted by real then imaginary part
    """
    _, b, c, d = charpoly3(m)
    if d == 0.0:
        # singular matrix: keep the zero root exact
        sq = np.sqrt(complex(b * b - 4.0 * c))
        pair = [(-b + sq) / 2.0, (-b - sq) / 2.0]
        if sq.imag == 0.0:
            pair = [complex(_polish(r.real, b, c, d)) for r in pair]
        values = np.array([0.0] + pair, dtype=complex)
        return _sorted(values)

    shift = b / 3.0
    p = c - b * shift
    q = 2.0 * shift**3 - shift * c + d
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3

    if disc < 0.0:
        radius = 2.0 * math.sqrt(-p / 3.0)
        cos_arg = max(-1.0, min(1.0, 3.0 * q / (p * radius)))
        phi = math.acos(cos_arg) / 3.0
        roots = [
            _polish(radius * math.cos(phi - 2.0 * math.pi * k / 3.0) - shift, b, c, d)
            for k in range(3)
        ]
        values = np.array(roots, dtype=complex)
    else:
        big = -math.copysign(np.cbrt(abs(q) / 2.0 + math.sqrt(disc)), q)
        small = -p / (3.0 * big) if big != 0.0 else 0.0
        real_root = _polish(big + small - shift, b, c, d)
        lin = b + real_root
        const = c + lin * real_root
        sq = np.sqrt(complex(lin * lin - 4.0 * const))
        pair = [(-lin + sq) / 2.0, (-lin - sq) / 2.0]
        if sq.imag == 0.0:
            pair = [complex(_polish(r.real, b, c, d)) for r in pair]
        values = np.array([real_root] + pair, dtype=complex)

    return _sorted(values)


def _sorted(values: np.ndarray) -> np.ndarray:
    return values[np.lexsort((values.imag, values.real))]


def is_hurwitz(
    m: np.ndarray, margin: float = 0.0, params: Optional[FormationSpec] = None
) -> StabilityReport:
    """Hurwitz verdict: every eigenvalue has real part below -margin."""
    eigenvalues = eig3(m)
    max_real = float(np.max(eigenvalues.real))
    total = max_real + margin
    return StabilityReport(
        jacobian=np.asarray(m, dtype=float),
        eigenvalues=eigenvalues,
        max_real=max_real,
        required_margin=margin,
        margin=total,
        hurwitz=total < 0.0,
        params=params,
    )


def lemma1_matrix(p1: float, p2: float, a: float, b: float, c: float) -> np.ndarray:
    """Bordered matrix [[p1, p2, a], [p2, p1, a], [b, c, 0]]."""
    if not (p1 > 0 and p1 > p2 and p1 * p1 > p2 * p2):
        raise PreconditionViolated(
            f"need p1 > 0, p1 > p2 and p1^2 > p2^2, got p1={p1}, p2={p2}"
        )
    return np.array([[p1, p2, a], [p2, p1, a], [b, c, 0.0]])


def lemma1_check(p1: float, p2: float, a: float, b: float, c: float) -> LemmaCheck:
    """Compare the first-order estimate of the small eigenvalue with eig3."""
    m = lemma1_matrix(p1, p2, a, b, c)
    bound = 0.1 * min(1.0, p1 * p1 - p2 * p2) / (abs(b) + abs(c) + 1.0)
    if abs(a) > bound:
        raise PreconditionViolated(f"|a|={abs(a):.3e} exceeds the bound {bound:.3e}")

    approx = a * (b + c) * (p2 - p1) / (p1 * p1 - p2 * p2)
    eigenvalues = eig3(m)
    exact = float(eigenvalues[np.argmin(np.abs(eigenvalues))].real)
    if approx == 0.0:
        agrees = abs(exact) < 1e-9
    else:
        agrees = math.copysign(1.0, approx) == math.copysign(1.0, exact)
    return LemmaCheck(approx, exact, agrees)


def zdyn_coefficient_matrix(
    e_star: float, n1: float, n2: float, c: float
) -> np.ndarray:
    """Coefficients driving z when both errors are frozen at ``e_star``."""
    if n1 <= 0 or n2 <= 0:
        raise PreconditionViolated(f"link norms must be positive, got {n1}, {n2}")
    diag = -(2.0 * e_star - c)
    off = e_star + c
    return np.array([[diag / n1, off / n2], [off / n1, diag / n2]])


def classify_equilibrium(
    s: np.ndarray, spec: FormationSpec, tol: float = DEFAULT_CLASSIFY_TOL
) -> EquilibriumClass:
    """Decide which equilibrium set, if any, the state belongs to."""
    z = dynamics.relative_vectors(s)
    zh1, zh2 = unit(z.z1), unit(z.z2)
    e1 = float(norm(z.z1)) - spec.d1
    e2 = float(norm(z.z2)) - spec.d2
    c = dynamics.effective_gain(spec)

    field_norm = float(np.linalg.norm(dynamics.shape_velocity(s, spec)))
    cond1 = (2.0 + float(dot2(zh1, zh2))) * (e2 - e1)
    e_star = (e1 + e2) / 2.0
    zeq = float(norm(zh2 - zh1)) * abs(3.0 * e_star + 2.0 * c)

    zero_errors = abs(e1) < tol and abs(e2) < tol
    kind = EquilibriumKind.NOT_EQUILIBRIUM
    if field_norm < tol:
        if zero_errors and float(norm(zh1 - zh2)) < tol:
            kind = EquilibriumKind.UD
        elif (
            spec.variant == Variant.BIASED_COLLINEAR
            and abs(e1 + 2.0 * c / 3.0) < tol
            and abs(e2 + 2.0 * c / 3.0) < tol
            and float(norm(zh1 + zh2)) < tol
        ):
            kind = EquilibriumKind.UU
        elif (
            spec.variant.rotated
            and zero_errors
            and float(norm(rotate(spec.theta, zh1) - zh2)) < tol
        ):
            kind = EquilibriumKind.UTHETA
        elif zero_errors:
            kind = EquilibriumKind.Z

    logger.debug(f"Classified state as {kind.value} (field norm {field_norm:.3e})")
    return EquilibriumClass(
        kind=kind, cond1_res=cond1, zeq_res=zeq, field_norm=field_norm, tol=tol
    )
