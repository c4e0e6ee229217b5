"""Ensemble estimation of means, variances, correlations and CLT diagnostics."""
from .clt import CltResult, clt_diagnostic, control_diagnostic, gaussian_control, ks_normality
from .estimators import (
    MIN_SAMPLES,
    batch_standard_error,
    empirical_correlation,
    estimate_mean,
    estimate_variance,
    mean_from_values,
    observable_values,
    pair_variance,
    pair_variance_from_values,
    shifted_mean,
    variance_from_values,
)
from .exports import estimate_records, write_correlation_csv
from .sampling import (
    BLOCK_SIZE,
    SEED_ATTRACTOR_BOX,
    SEED_DISTRIBUTIONS,
    SEED_UNIFORM,
    EnsembleSpec,
    block_rng,
    sample_block,
)

__all__ = [
    "BLOCK_SIZE",
    "CltResult",
    "EnsembleSpec",
    "MIN_SAMPLES",
    "SEED_ATTRACTOR_BOX",
    "SEED_DISTRIBUTIONS",
    "SEED_UNIFORM",
    "batch_standard_error",
    "block_rng",
    "clt_diagnostic",
    "control_diagnostic",
    "empirical_correlation",
    "estimate_mean",
    "estimate_records",
    "estimate_variance",
    "gaussian_control",
    "ks_normality",
    "mean_from_values",
    "observable_values",
    "pair_variance",
    "pair_variance_from_values",
    "sample_block",
    "shifted_mean",
    "variance_from_values",
    "write_correlation_csv",
]
