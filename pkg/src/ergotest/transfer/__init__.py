"""Ulam surrogate of the transfer operator."""
from .spectrum import (
    DecayEnvelope,
    SpectralGap,
    bin_averages,
    decay_envelope,
    operator_correlation,
    spectral_gap,
    stationary_density,
)
from .ulam import (
    UlamOperator,
    build_ulam,
    reference_masses,
    stationary_l1_error,
    summary,
    write_matrix_csv,
)

__all__ = [
    "DecayEnvelope",
    "SpectralGap",
    "UlamOperator",
    "bin_averages",
    "build_ulam",
    "decay_envelope",
    "operator_correlation",
    "reference_masses",
    "spectral_gap",
    "stationary_density",
    "stationary_l1_error",
    "summary",
    "write_matrix_csv",
]
