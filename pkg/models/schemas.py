"""
Pydantic Data Models for Flexformation

Typed, immutable models for formation parameters, rigid transforms,
simulation scenarios, stability reports and convergence reports.
"""

import math
from enum import Enum, IntEnum
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, StrictInt, root_validator, validator

# Documented defaults
DEFAULT_DT = 0.01
DEFAULT_HORIZON = 120.0
DEFAULT_RECORD_EVERY = 10
DEFAULT_SPREAD = 60.0
DEFAULT_CLASSIFY_TOL = 1e-6


def _encode_array(value: np.ndarray) -> list:
    """Encode an ndarray for JSON; complex entries become [re, im] pairs."""
    if np.iscomplexobj(value):
        return np.stack([value.real, value.imag], axis=-1).tolist()
    return value.tolist()


class ExitCode(IntEnum):
    """Process exit statuses of the command line tool."""

    OK = 0
    CONFIG_ERROR = 1
    ABORTED = 2
    SELFTEST_FAILED = 3


class Variant(str, Enum):
    """Controller variant driving the middle agent."""

    UNBIASED = "unbiased"
    BIASED_COLLINEAR = "biased-collinear"
    ROTATED_SPLIT = "rotated-split"
    ROTATED_ONE_SIDED = "rotated-one-sided"

    @property
    def rotated(self) -> bool:
        return self in (Variant.ROTATED_SPLIT, Variant.ROTATED_ONE_SIDED)


class FormationSpec(BaseModel):
    """Desired shape and bias of a three-agent, two-link formation."""

    d1: float = Field(..., description="Desired length of link 1 (agents 1-2)")
    d2: float = Field(..., description="Desired length of link 2 (agents 2-3)")
    theta: float = Field(
        0.0, description="Desired signed angle from z1_hat to z2_hat (radians)"
    )
    c: float = Field(0.0, description="Bias gain")
    variant: Variant = Field(Variant.BIASED_COLLINEAR, description="Controller variant")
    mu1: Optional[float] = Field(
        None, description="Bias on link 1 (overrides c for biased-collinear)"
    )
    mu2: Optional[float] = Field(
        None, description="Bias on link 2 (overrides -c for biased-collinear)"
    )

    @validator("d1", "d2")
    def distance_positive(cls, v, field):
        if not math.isfinite(v) or v <= 0:
            raise ValueError(f"{field.name} must be positive and finite, got {v}")
        return v

    @validator("theta")
    def theta_open_interval(cls, v):
        if not math.isfinite(v) or not -math.pi < v < math.pi:
            raise ValueError(f"theta must lie strictly inside (-pi, pi), got {v}")
        return v

    @validator("c", "mu1", "mu2")
    def gain_finite(cls, v, field):
        if v is not None and not math.isfinite(v):
            raise ValueError(f"{field.name} must be finite")
        return v

    @root_validator(skip_on_failure=True)
    def bias_pair_complete(cls, values):
        if (values.get("mu1") is None) != (values.get("mu2") is None):
            raise ValueError("mu1 and mu2 must be given together")
        return values

    class Config:
        allow_mutation = False
        schema_extra = {
            "example": {
                "d1": 30.0,
                "d2": 10.0,
                "theta": 0.0,
                "c": 1.0,
                "variant": "biased-collinear",
            }
        }


class SE2Transform(BaseModel):
    """Planar rigid transform x -> R(angle) x + (tx, ty)."""

    angle: float = Field(0.0, description="Rotation angle (radians)")
    tx: float = Field(0.0, description="Translation along x")
    ty: float = Field(0.0, description="Translation along y")

    class Config:
        allow_mutation = False

    @classmethod
    def identity(cls) -> "SE2Transform":
        return cls()

    @property
    def rotation(self) -> np.ndarray:
        from formation.geometry import rot2

        return rot2(self.angle)

    @property
    def translation(self) -> np.ndarray:
        return np.array([self.tx, self.ty])

    def compose(self, other: "SE2Transform") -> "SE2Transform":
        """Return self o other (apply ``other`` first)."""
        from formation.geometry import wrap_angle

        tx, ty = self.apply(other.translation)
        return SE2Transform(
            angle=float(wrap_angle(self.angle + other.angle)), tx=tx, ty=ty
        )

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Transform points of shape (..., 2)."""
        points = np.asarray(points, dtype=float)
        return points @ self.rotation.T + self.translation


class Scenario(BaseModel):
    """A complete, reproducible simulation request."""

    spec: FormationSpec = Field(..., description="Formation parameters")
    initial: Optional[np.ndarray] = Field(
        None, description="Initial agent positions, shape (3, 2)"
    )
    initial_errors: Optional[np.ndarray] = Field(
        None, description="Initial error vector (e1, e2, e3) for error-space runs"
    )
    dt: float = Field(DEFAULT_DT, description="Integration step (seconds)")
    horizon: float = Field(DEFAULT_HORIZON, description="Simulated time (seconds)")
    record_every: StrictInt = Field(
        DEFAULT_RECORD_EVERY, description="Record one sample every N steps"
    )
    seed: StrictInt = Field(0, description="Seed for randomized initial states")
    spread: float = Field(DEFAULT_SPREAD, description="Side of the sampling box")
    collinear_start: bool = Field(
        False, description="Sample a straight-chain initial state"
    )
    classify_tol: float = Field(
        DEFAULT_CLASSIFY_TOL, description="Equilibrium classification tolerance"
    )

    @validator("initial", pre=True)
    def initial_shape(cls, v):
        if v is None:
            return v
        arr = np.array(v, dtype=float)
        if arr.shape != (3, 2) or not np.all(np.isfinite(arr)):
            raise ValueError("initial must be three finite planar positions")
        arr.setflags(write=False)
        return arr

    @validator("initial_errors", pre=True)
    def initial_errors_shape(cls, v):
        if v is None:
            return v
        arr = np.array(v, dtype=float)
        if arr.shape != (3,) or not np.all(np.isfinite(arr)):
            raise ValueError("initial_errors must be three finite numbers")
        arr.setflags(write=False)
        return arr

    @validator("dt")
    def dt_positive(cls, v):
        if not math.isfinite(v) or v <= 0:
            raise ValueError(f"dt must be positive, got {v}")
        return v

    @validator("horizon")
    def horizon_covers_step(cls, v, values):
        dt = values.get("dt")
        if not math.isfinite(v) or (dt is not None and v < dt):
            raise ValueError(f"horizon must be at least dt, got {v}")
        return v

    @validator("record_every")
    def record_every_positive(cls, v):
        if v < 1:
            raise ValueError(f"record_every must be at least 1, got {v}")
        return v

    @validator("seed")
    def seed_non_negative(cls, v):
        if v < 0:
            raise ValueError(f"seed must be non-negative, got {v}")
        return v

    @validator("spread", "classify_tol")
    def strictly_positive(cls, v, field):
        if not math.isfinite(v) or v <= 0:
            raise ValueError(f"{field.name} must be positive, got {v}")
        return v

    class Config:
        allow_mutation = False
        arbitrary_types_allowed = True
        json_encoders = {np.ndarray: _encode_array}


class StabilityReport(BaseModel):
    """Eigenvalue verdict for a linearization."""

    jacobian: np.ndarray = Field(..., description="3x3 matrix under test")
    eigenvalues: np.ndarray = Field(..., description="Three complex eigenvalues")
    max_real: float = Field(..., description="Most positive real part")
    required_margin: float = Field(0.0, description="Decay rate demanded")
    margin: float = Field(..., description="max_real + required_margin")
    hurwitz: bool = Field(..., description="True iff margin < 0")
    params: Optional[FormationSpec] = Field(None, description="Source parameters")

    @root_validator(skip_on_failure=True)
    def verdict_consistent(cls, values):
        if values["hurwitz"] != (values["margin"] < 0):
            raise ValueError("hurwitz verdict disagrees with margin")
        return values

    class Config:
        allow_mutation = False
        arbitrary_types_allowed = True
        json_encoders = {np.ndarray: _encode_array}


class EquilibriumKind(str, Enum):
    """Equilibrium sets of the closed loop."""

    UD = "Ud"
    UU = "Uu"
    UTHETA = "UTheta"
    Z = "Z"
    NOT_EQUILIBRIUM = "NotEquilibrium"


class EquilibriumClass(BaseModel):
    """Classification verdict plus the residuals it was based on."""

    kind: EquilibriumKind = Field(..., description="Equilibrium set")
    cond1_res: float = Field(..., description="(2 + z1_hat.z2_hat)(e2 - e1)")
    zeq_res: float = Field(..., description="|(z2_hat - z1_hat)(3 e* + 2c)|")
    field_norm: float = Field(..., description="Norm of the shape velocity")
    tol: float = Field(DEFAULT_CLASSIFY_TOL, description="Tolerance used")

    @root_validator(skip_on_failure=True)
    def equilibrium_has_small_field(cls, values):
        if (
            values["kind"] != EquilibriumKind.NOT_EQUILIBRIUM
            and not values["field_norm"] < values["tol"]
        ):
            raise ValueError("an equilibrium must have field norm below tol")
        return values

    class Config:
        allow_mutation = False


class ConvergenceReport(BaseModel):
    """Asymptotic summary of a position-space run."""

    final_time: float = Field(..., description="Time of the last sample")
    final_errors: Tuple[float, float, float] = Field(..., description="(e1, e2, e3)")
    final_gamma: float = Field(..., description="Signed inter-link angle (radians)")
    link_alignment: float = Field(..., description="z1_hat . z2_hat at the end")
    steady_velocity: Tuple[float, float] = Field(
        ..., description="Centroid velocity over the trailing window"
    )
    steady_speed: float = Field(..., description="Norm of steady_velocity")
    agent_velocities: List[Tuple[float, float]] = Field(
        ..., description="Per-agent velocity over the trailing window"
    )
    agent_speeds: List[float] = Field(..., description="Per-agent speed")
    collinearity_residual: float = Field(..., description="cross(z1_hat, z2_hat)")
    min_link_distance: float = Field(..., description="Shortest link over the run")
    classified: EquilibriumClass = Field(..., description="End-state class")

    @root_validator(skip_on_failure=True)
    def speed_matches_velocity(cls, values):
        vx, vy = values["steady_velocity"]
        if abs(values["steady_speed"] - math.hypot(vx, vy)) > 1e-12:
            raise ValueError("steady_speed must equal the norm of steady_velocity")
        return values

    class Config:
        allow_mutation = False


class RunArtifacts(BaseModel):
    """Files written by a command and its exit status."""

    csv_path: Optional[Path] = Field(None, description="Trajectory or sweep CSV")
    report_path: Optional[Path] = Field(None, description="JSON report document")
    samples: int = Field(0, description="Rows written to the CSV")
    exit_status: ExitCode = Field(ExitCode.OK, description="Process exit status")

    class Config:
        allow_mutation = False
