"""
Exception Hierarchy for Flexformation

Every error raised by the formation, simulation and cli packages derives
from FormationError so callers can catch the whole family at once.
"""

from typing import Any, Optional


class FormationError(Exception):
    """Base class for all toolkit errors."""


class FieldDomainError(FormationError):
    """A vector field was evaluated outside its domain."""


class DegenerateVector(FieldDomainError):
    """A link vector is too short to be normalized (agents coincide)."""

    def __init__(self, norm: float, message: Optional[str] = None):
        self.norm = float(norm)
        super().__init__(message or f"degenerate vector: norm {self.norm:.3e}")


class InvalidErrorVec(FieldDomainError):
    """An error vector implies a non-positive link length."""

    def __init__(self, component: int, value: float, message: Optional[str] = None):
        self.component = component
        self.value = float(value)
        super().__init__(
            message
            or f"invalid error vector: e{component} + d{component} = "
            f"{self.value:.6g} <= 0"
        )


class SingularAngle(FormationError):
    """Angle-dependent partials requested at a singular angle."""


class PreconditionViolated(FormationError):
    """Inputs outside the admissible region of an operation."""


class SamplingFailed(FormationError):
    """The initial-state sampler ran out of attempts."""


class IntegrationAborted(FormationError):
    """Integration stopped because the field left its domain.

    Carries the time stamp of the failing step and the trajectory recorded
    up to that point. The original field error is chained as ``__cause__``.
    """

    def __init__(self, time: float, partial: Any, message: str):
        self.time = float(time)
        self.partial = partial
        super().__init__(message)


class ScenarioFileError(FormationError):
    """A scenario file could not be parsed or validated."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(f"{prefix}{message}")
