"""Exception hierarchy shared by every ergotest subsystem."""
from __future__ import annotations

from typing import Optional, Sequence


class ErgotestError(Exception):
    """Base class for all errors raised by ergotest."""


class ConfigError(ErgotestError, ValueError):
    """Aggregated run-configuration validation failure."""

    def __init__(self, violations: Sequence[str]) -> None:
        self.violations = tuple(violations)
        lines = "\n".join(f"  - {item}" for item in self.violations)
        super().__init__(f"Invalid configuration ({len(self.violations)} problem(s)):\n{lines}")


class ParameterError(ErgotestError, ValueError):
    """A numeric parameter lies outside its admissible range."""


class ArityError(ParameterError):
    """An observable was requested with an unsupported number of variables."""


class DomainError(ErgotestError, ValueError):
    """A state lies outside the domain of the system."""


class BoundsError(ErgotestError, IndexError):
    """A window or index falls outside the available data."""


class PreconditionError(ErgotestError, ValueError):
    """Inputs violate a documented precondition of the operation."""


class CapabilityError(ErgotestError, TypeError):
    """The system lacks the structure an operation needs (Jacobian, branches, dimension)."""


class DivergenceError(ErgotestError, ArithmeticError):
    """An orbit left every bounded region or produced a non-finite value."""

    def __init__(self, message: str, step: Optional[int] = None) -> None:
        self.step = step
        if step is not None:
            message = f"{message} (step {step})"
        super().__init__(message)


class ConvergenceError(ErgotestError, ArithmeticError):
    """An iterative method hit its iteration cap."""

    def __init__(self, message: str, residual: Optional[float] = None) -> None:
        self.residual = residual
        if residual is not None:
            message = f"{message} (residual {residual:.3e})"
        super().__init__(message)


class TruncationError(ErgotestError, ArithmeticError):
    """A quantity depends on the part of a tower removed by truncation."""


class SamplingError(ErgotestError, RuntimeError):
    """Too many ensemble members had to be discarded."""


class DegeneracyError(ErgotestError, ArithmeticError):
    """A statistic is undefined because the sample has zero spread."""


class InconsistentConstantsError(ErgotestError, ValueError):
    """Stored Hölder constants contradict the observed variation of an observable."""


# Failures of the computation itself (as opposed to invalid requests).
COMPUTATIONAL_ERRORS = (
    DivergenceError,
    ConvergenceError,
    TruncationError,
    SamplingError,
    DegeneracyError,
    InconsistentConstantsError,
)
