"""Core models and helpers exposed at the package level."""
from .errors import (
    COMPUTATIONAL_ERRORS,
    ArityError,
    BoundsError,
    CapabilityError,
    ConfigError,
    ConvergenceError,
    DegeneracyError,
    DivergenceError,
    DomainError,
    ErgotestError,
    InconsistentConstantsError,
    ParameterError,
    PreconditionError,
    SamplingError,
    TruncationError,
)
from .models import METHOD_BATCH, METHOD_EXACT, METHOD_IID, Z_95, EstimateWithCI
from .references import resolve_callable

__all__ = [
    "COMPUTATIONAL_ERRORS",
    "ArityError",
    "BoundsError",
    "CapabilityError",
    "ConfigError",
    "ConvergenceError",
    "DegeneracyError",
    "DivergenceError",
    "DomainError",
    "ErgotestError",
    "EstimateWithCI",
    "InconsistentConstantsError",
    "METHOD_BATCH",
    "METHOD_EXACT",
    "METHOD_IID",
    "ParameterError",
    "PreconditionError",
    "SamplingError",
    "TruncationError",
    "Z_95",
    "resolve_callable",
]
