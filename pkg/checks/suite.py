"""
Invariant Check Suite

Named, self-contained checks of the geometric, dynamical and spectral
properties of the toolkit. Each check returns a CheckResult; the selftest
command runs them all or a chosen subset.
"""

import logging
import math
import tempfile
import time
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Optional

import numpy as np
from pydantic import BaseModel, Field

from formation import analysis, dynamics
from formation.geometry import cross2, norm, rot2, signed_angle, unit
from models.schemas import FormationSpec, Scenario, SE2Transform, Variant

logger = logging.getLogger(__name__)


class CheckResult(BaseModel):
    """Outcome of one named check."""

    name: str = Field(..., description="Registered check name")
    passed: bool = Field(..., description="Whether the property held")
    detail: str = Field("", description="Worst deviation or failure reason")
    seconds: float = Field(0.0, description="Wall time")


CheckFn = Callable[[], CheckResult]
REGISTRY: Dict[str, CheckFn] = {}


def register(name: str) -> Callable[[Callable[[], tuple]], CheckFn]:
    """Register a check returning (passed, detail) under ``name``."""

    def decorator(fn: Callable[[], tuple]) -> CheckFn:
        def run() -> CheckResult:
            start = time.perf_counter()
            try:
                passed, detail = fn()
            except Exception as e:
                logger.error(f"Check {name} raised: {e}")
                passed, detail = False, f"raised {type(e).__name__}: {e}"
            return CheckResult(
                name=name,
                passed=bool(passed),
                detail=detail,
                seconds=time.perf_counter() - start,
            )

        REGISTRY[name] = run
        return run

    return decorator


def run_checks(names: Optional[Iterable[str]] = None) -> List[CheckResult]:
    """Run the named checks (all when ``names`` is None) in registry order."""
    selected = list(REGISTRY) if names is None else list(names)
    unknown = [n for n in selected if n not in REGISTRY]
    if unknown:
        raise KeyError(", ".join(unknown))
    results = []
    for name in selected:
        result = REGISTRY[name]()
        level = logging.INFO if result.passed else logging.ERROR
        logger.log(level, f"{name}: {'pass' if result.passed else 'FAIL'}")
        results.append(result)
    return results


def _rng() -> np.random.Generator:
    return np.random.default_rng(20240601)


def _random_states(rng: np.random.Generator, count: int) -> np.ndarray:
    states = rng.uniform(-50.0, 50.0, size=(count, 3, 2))
    keep = np.min(
        norm(np.stack([states[:, 0] - states[:, 1], states[:, 1] - states[:, 2]])),
        axis=0,
    )
    return states[keep > 1.0]


def _within(deviation: float, tol: float) -> tuple:
    return deviation < tol, f"max deviation {deviation:.3e} (tol {tol:.0e})"


# geometry


@register("geometry-unit-norm")
def _unit_norm():
    v = _rng().uniform(-1e3, 1e3, size=(1000, 2))
    return _within(float(np.max(np.abs(norm(unit(v)) - 1.0))), 1e-14)


@register("geometry-rotation-group")
def _rotation_group():
    ab = _rng().uniform(-math.pi, math.pi, size=(1000, 2))
    lhs = rot2(ab[:, 0]) @ rot2(ab[:, 1])
    return _within(float(np.max(np.abs(lhs - rot2(ab[:, 0] + ab[:, 1])))), 1e-13)


@register("geometry-cross-sine")
def _cross_sine():
    rng = _rng()
    u = rng.normal(size=(1000, 2))
    v = rng.normal(size=(1000, 2))
    deviation = np.abs(cross2(unit(u), unit(v)) - np.sin(signed_angle(u, v)))
    return _within(float(np.max(deviation)), 1e-12)


@register("geometry-signed-angle-antisymmetry")
def _signed_angle_antisymmetry():
    rng = _rng()
    u = rng.normal(size=(1000, 2))
    v = rng.normal(size=(1000, 2))
    deviation = np.abs(signed_angle(u, v) + signed_angle(v, u))
    return _within(float(np.max(deviation)), 1e-15)


# dynamics


@register("dynamics-centroid-drift")
def _centroid_drift():
    rng = _rng()
    states = _random_states(rng, 200)
    spec = FormationSpec(
        d1=30, d2=10, variant=Variant.BIASED_COLLINEAR, mu1=0.7, mu2=-1.3
    )
    u = dynamics.velocity_field(spec)(states)
    z = dynamics.relative_vectors(states)
    expected = 0.7 * unit(z.z1) - 1.3 * unit(z.z2)
    unbiased = dynamics.velocity_field(spec.copy(update={"variant": Variant.UNBIASED}))
    worst = max(
        float(np.max(np.abs(u.sum(axis=-2) - expected))),
        float(np.max(np.abs(unbiased(states).sum(axis=-2)))),
    )
    return _within(worst, 1e-12)


@register("dynamics-se2-equivariance")
def _equivariance():
    rng = _rng()
    states = _random_states(rng, 100)
    worst = 0.0
    for variant in Variant:
        spec = FormationSpec(d1=30, d2=10, theta=1.0, c=0.4, variant=variant)
        field = dynamics.velocity_field(spec)
        g = SE2Transform(
            angle=rng.uniform(-math.pi, math.pi), tx=rng.normal(), ty=rng.normal()
        )
        lhs = field(g.apply(states))
        rhs = field(states) @ g.rotation.T
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return _within(worst, 1e-12)


@register("dynamics-law-of-cosines")
def _law_of_cosines():
    states = _random_states(_rng(), 500)
    z = dynamics.relative_vectors(states)
    lhs = np.sum(unit(z.z1) * unit(z.z2), axis=-1)
    rhs = dynamics.law_of_cosines(norm(z.z1), norm(z.z2), norm(z.z3))
    return _within(float(np.max(np.abs(lhs - rhs))), 1e-12)


@register("dynamics-mixed-rates-fd")
def _mixed_rates_fd():
    from simulation.runner import simulate

    spec = FormationSpec(d1=30, d2=10, c=1.0)
    traj, _ = simulate(Scenario(spec=spec, horizon=5.0, seed=3, record_every=20))
    field = dynamics.velocity_field(spec)
    h = 1e-6
    worst = 0.0
    for s in traj.samples:
        z = dynamics.relative_vectors(s)
        e = dynamics.distance_errors(s, spec)
        mixed = dynamics.error_field_mixed(z.z1, z.z2, e.e1, e.e2, spec.c)
        # central difference of the link lengths along the flow
        ahead = dynamics.relative_vectors(s + h * field(s))
        behind = dynamics.relative_vectors(s - h * field(s))
        fd1 = (float(norm(ahead.z1)) - float(norm(behind.z1))) / (2 * h)
        fd2 = (float(norm(ahead.z2)) - float(norm(behind.z2))) / (2 * h)
        worst = max(worst, abs(fd1 - mixed.e1_dot), abs(fd2 - mixed.e2_dot))
    return _within(worst, 1e-6)


@register("dynamics-equilibria-zero")
def _equilibria_zero():
    stationary = FormationSpec(d1=30, d2=10, c=1.0)
    moving = FormationSpec(d1=30, d2=10, c=-1.0)
    triangle = FormationSpec(
        d1=30, d2=10, theta=math.pi / 3, c=0.1, variant=Variant.ROTATED_SPLIT
    )
    ud = np.array([[0.0, 0.0], [30.0, 0.0], [40.0, 0.0]])
    uu = dynamics.uu_configuration(moving, heading=0.4)
    tri = np.array([[0.0, 0.0], [30.0, 0.0], [0.0, 0.0]])
    tri[2] = tri[1] - 10.0 * (rot2(math.pi / 3) @ np.array([-1.0, 0.0]))
    worst = max(
        float(np.max(np.abs(dynamics.velocity_field(stationary)(ud)))),
        float(np.max(np.abs(dynamics.shape_velocity(uu, moving)))),
        float(np.max(np.abs(dynamics.velocity_field(triangle)(tri)))),
    )
    return _within(worst, 1e-12)


@register("dynamics-rotated-reduces-to-biased")
def _rotated_reduces():
    states = _random_states(_rng(), 100)
    spec = FormationSpec(d1=30, d2=10, theta=0.0, c=1.0, variant=Variant.ROTATED_SPLIT)
    lhs = dynamics.velocity_field(spec)(states)
    collinear = spec.copy(update={"variant": Variant.BIASED_COLLINEAR})
    rhs = dynamics.velocity_field(collinear)(states)
    return _within(float(np.max(np.abs(lhs - rhs))), 1e-14)


# analysis


@register("analysis-eigenvalue-identity")
def _eigenvalue_identity():
    rng = _rng()
    worst = 0.0
    for _ in range(1000):
        d1, d2 = rng.uniform(0.1, 100.0, size=2)
        c = rng.uniform(-5.0, 5.0)
        numeric = analysis.eig3(analysis.jacobian_collinear(d1, d2, c))
        closed = np.sort_complex(analysis.collinear_eigenvalues(d1, d2, c))
        worst = max(worst, float(np.max(np.abs(np.sort_complex(numeric) - closed))))
    return _within(worst, 1e-8)


@register("analysis-fd-jacobian-collinear")
def _fd_collinear():
    worst = 0.0
    for d1, d2, c in ((30.0, 10.0, 1.0), (1.0, 1.0, -0.5), (5.0, 50.0, 0.2)):
        spec = FormationSpec(d1=d1, d2=d2, c=c)
        fd = analysis.fd_jacobian(dynamics.collinear_error_rates(spec), np.zeros(3))
        closed = analysis.jacobian_collinear(d1, d2, c)
        worst = max(worst, float(np.max(np.abs(fd - closed))))
    return _within(worst, 1e-5)


@register("analysis-fd-jacobian-rotated")
def _fd_rotated():
    worst = 0.0
    for deg in (30, 60, 120, 150, -30, -60, -120, -150):
        for c in (0.01, 0.05, 0.1):
            theta = math.radians(deg)
            spec = FormationSpec(
                d1=30, d2=10, theta=theta, c=c, variant=Variant.ROTATED_SPLIT
            )
            fd = analysis.fd_jacobian(dynamics.rotated_error_rates(spec), np.zeros(3))
            closed = analysis.jacobian_rotated(30.0, 10.0, theta, c)
            worst = max(worst, float(np.max(np.abs(fd - closed))))
    return _within(worst, 1e-5)


@register("analysis-partials-sign")
def _partials_sign():
    thetas = [t for t in np.linspace(-3.0, 3.0, 61) if abs(t) > 1e-3]
    smallest = min(analysis.partials_a(30.0, 10.0, t, t / 2)[2] for t in thetas)
    return smallest > 0, f"smallest a3 {smallest:.3e}"


@register("analysis-rotated-hurwitz-sweep")
def _rotated_hurwitz_sweep():
    worst = -math.inf
    grid = np.arange(-0.97 * math.pi, 0.97 * math.pi, math.pi / 36)
    for d1, d2 in ((30.0, 10.0), (1.0, 1.0), (5.0, 50.0)):
        for theta in grid:
            theta = float(theta)
            report = analysis.is_hurwitz(analysis.jacobian_rotated(d1, d2, theta, 0.01))
            slow = analysis.rotated_slow_rate(d1, d2, theta, 0.01)
            worst = max(worst, report.max_real / slow)
    return worst < -0.5, f"largest max_real / slow rate {worst:.3f}"


@register("analysis-lemma-sign")
def _lemma_sign():
    rng = _rng()
    failures = 0
    worst_rel = 0.0
    for _ in range(1000):
        p1 = rng.uniform(1.0, 3.0)
        p2 = rng.uniform(-0.5 * p1, 0.5 * p1)
        b, c = rng.uniform(-1.0, 2.0, size=2)
        if b + c <= 0.01:
            continue
        for a in (-1e-2, -1e-3):
            check = analysis.lemma1_check(p1, p2, a, b, c)
            if not (check.sign_agrees and check.exact_lambda3 > 0):
                failures += 1
            if a == -1e-3:
                rel = abs(check.approx_lambda3 - check.exact_lambda3) / abs(
                    check.exact_lambda3
                )
                worst_rel = max(worst_rel, rel)
    return failures == 0 and worst_rel < 0.2, (
        f"{failures} sign failures, worst relative error {worst_rel:.3e}"
    )


@register("analysis-uu-critical-sign")
def _uu_sign():
    details = []
    ok = True
    for c in (1.0, -1.0, 0.5, -0.5):
        values = analysis.eig3(analysis.jacobian_uu(FormationSpec(d1=30, d2=10, c=c)))
        critical = values[np.argmin(np.abs(values))].real
        ok = ok and math.copysign(1.0, critical) == math.copysign(1.0, c)
        details.append(f"c={c:+g}: {critical:+.4f}")
    return ok, "; ".join(details)


@register("analysis-dominant-rate")
def _dominant_rate():
    rng = _rng()
    worst = 0.0
    for _ in range(200):
        d1, d2 = rng.uniform(0.5, 60.0, size=2)
        c = rng.uniform(0.01, 5.0)
        values = analysis.eig3(analysis.jacobian_collinear(d1, d2, c))
        rate = -float(np.max(values.real))
        worst = max(worst, abs(rate - analysis.dominant_rate(d1, d2, c)))
    return _within(worst, 1e-9)


# simulation


@register("sim-rk4-order")
def _rk4_order():
    from simulation.integrator import integrate

    spec = FormationSpec(d1=30, d2=10, c=1.0)
    x0 = np.array([[0.0, 0.0], [25.0, 5.0], [30.0, -5.0]])
    field = dynamics.velocity_field(spec)
    reference = integrate(field, x0, 0.0025, 2.0, 800).final
    coarse = np.max(np.abs(integrate(field, x0, 0.04, 2.0, 50).final - reference))
    fine = np.max(np.abs(integrate(field, x0, 0.02, 2.0, 100).final - reference))
    ratio = float(coarse / fine)
    return 8.0 <= ratio <= 32.0, f"error ratio {ratio:.2f}"


@register("sim-determinism")
def _determinism():
    from simulation.runner import simulate

    sc = Scenario(spec=FormationSpec(d1=30, d2=10, c=1.0), horizon=5.0, seed=11)
    first, _ = simulate(sc)
    second, _ = simulate(sc)
    same = np.array_equal(first.samples, second.samples)
    return same, "bit-identical" if same else "runs differ"


@register("sim-dual-collinear")
def _dual_collinear():
    from simulation.runner import simulate, simulate_errors

    spec = FormationSpec(d1=30, d2=10, c=1.0)
    starts = (
        [[0.0, 0.0], [25.0, 5.0], [30.0, -5.0]],
        [[-20.0, 10.0], [5.0, -3.0], [12.0, 14.0]],
        [[10.0, 25.0], [-8.0, 0.0], [-20.0, -15.0]],
    )
    worst = 0.0
    for start in starts:
        traj, _ = simulate(
            Scenario(spec=spec, initial=start, dt=0.002, horizon=20.0, record_every=50)
        )
        errors = simulate_errors(
            Scenario(
                spec=spec,
                initial_errors=traj.derived.errors[0],
                dt=0.002,
                horizon=20.0,
                record_every=50,
            )
        )
        worst = max(worst, float(np.max(np.abs(errors.samples - traj.derived.errors))))
    return _within(worst, 1e-6)


def _figure_check(name: str, seeds: int, verdict) -> tuple:
    from cli.presets import preset_scenario
    from simulation.runner import simulate_batch

    results = simulate_batch([preset_scenario(name, seed=s) for s in range(seeds)])
    reports = [report for _, report in results]
    return verdict(reports)


@register("sim-figure-collinear-stationary")
def _figure_stationary():
    def verdict(reports):
        worst = max(
            max(abs(r.final_errors[0]), abs(r.final_errors[1]), max(r.agent_speeds))
            for r in reports
        )
        classes = {r.classified.kind.value for r in reports}
        return worst < 1e-6 and classes == {"Ud"}, f"worst {worst:.3e}, {classes}"

    return _figure_check("collinear-stationary", 3, verdict)


@register("sim-figure-collinear-moving")
def _figure_moving():
    def verdict(reports):
        worst = max(
            max(
                abs(r.final_errors[0] - 2 / 3),
                abs(r.final_errors[1] - 2 / 3),
                max(abs(s - 2 / 3) for s in r.agent_speeds),
            )
            for r in reports
        )
        return worst < 1e-4, f"worst deviation from 2/3 {worst:.3e}"

    return _figure_check("collinear-moving", 3, verdict)


@register("sim-figure-triangle")
def _figure_triangle():
    def verdict(reports):
        angle = max(abs(math.degrees(r.final_gamma) - 60.0) for r in reports)
        speed = max(max(r.agent_speeds) for r in reports)
        return angle < 0.05 and speed < 1e-5, (
            f"angle off by {angle:.3e} deg, max speed {speed:.3e}"
        )

    return _figure_check("triangle", 3, verdict)


@register("sim-unbiased-baseline")
def _unbiased_baseline():
    def verdict(reports):
        worst = max(
            max(abs(r.final_errors[0]), abs(r.final_errors[1])) for r in reports
        )
        angles = [r.final_gamma for r in reports]
        span = max(angles) - min(angles)
        return worst < 1e-6 and span > 0.1, (
            f"worst error {worst:.3e}, final angles span {span:.3f} rad"
        )

    return _figure_check("unbiased", 4, verdict)


@register("sim-escape-travelling-set")
def _escape_travelling_set():
    from formation.geometry import rotate
    from simulation.runner import simulate

    spec = FormationSpec(d1=30, d2=10, c=1.0)
    s = dynamics.uu_configuration(spec)
    s[2] = s[1] + rotate(1e-3, s[2] - s[1])
    _, report = simulate(Scenario(spec=spec, initial=s, dt=0.05, horizon=600.0))
    kind = report.classified.kind.value
    return kind == "Ud", f"perturbed folded chain ends in {kind}"


@register("sim-collinear-start-triangle")
def _collinear_start_triangle():
    from cli.presets import preset_scenario
    from simulation.runner import simulate

    _, report = simulate(preset_scenario("triangle", seed=0, collinear_start=True))
    off = abs(math.degrees(report.final_gamma) - 60.0)
    return off < 0.05, f"straight-chain start ends {off:.3e} deg from 60"


@register("sim-se2-trajectory-equivariance")
def _trajectory_equivariance():
    from simulation.initial import random_initial, se2_apply
    from simulation.runner import simulate_batch

    spec = FormationSpec(d1=30, d2=10, c=1.0)
    moves = [
        SE2Transform(angle=2.1, tx=-4.0, ty=9.0),
        SE2Transform(angle=-0.6, tx=7.5, ty=-1.0),
    ]
    starts = [random_initial(seed, spec) for seed in range(len(moves))]
    base = simulate_batch(
        [Scenario(spec=spec, initial=p, horizon=10.0) for p in starts]
    )
    moved = simulate_batch(
        [
            Scenario(spec=spec, initial=se2_apply(p, g), horizon=10.0)
            for p, g in zip(starts, moves)
        ]
    )
    worst = max(
        float(np.max(np.abs(se2_apply(traj.samples, g) - other.samples)))
        for g, (traj, _), (other, _) in zip(moves, base, moved)
    )
    return _within(worst, 1e-10)


# cli


@register("cli-csv-roundtrip")
def _csv_roundtrip():
    from cli.output import read_csv_columns, write_trajectory_csv
    from simulation.runner import simulate

    traj, _ = simulate(
        Scenario(spec=FormationSpec(d1=30, d2=10, c=1.0), horizon=2.0, seed=5)
    )
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "trajectory.csv"
        rows = write_trajectory_csv(path, traj)
        columns = read_csv_columns(path)
    worst = max(
        float(np.max(np.abs(columns["e1"] - traj.derived.errors[:, 0]))),
        float(np.max(np.abs(columns["gamma"] - traj.derived.gamma))),
        float(np.max(np.abs(columns["speed3"] - traj.derived.speeds[:, 2]))),
    )
    return rows == len(traj) and worst == 0.0, f"{rows} rows, max deviation {worst:.1e}"
