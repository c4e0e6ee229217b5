"""Kolmogorov-Smirnov check of standardised Birkhoff sums against the normal law."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict

import numpy as np
from scipy import stats

from ergotest.core.errors import DegeneracyError, ParameterError, PreconditionError
from ergotest.core.models import METHOD_BATCH
from ergotest.maps.catalog import DynamicalSystem

from .estimators import shifted_mean
from .sampling import EnsembleSpec, block_rng, long_orbit, map_blocks

MIN_WINDOW = 100
MIN_CLT_SAMPLES = 10_000


@dataclass(frozen=True)
class CltResult:
    statistic: float
    p_value: float
    sample_count: int
    mean: float
    std: float

    def to_record(self) -> Dict[str, float]:
        return {
            "ks_statistic": self.statistic,
            "p_value": self.p_value,
            "n_samples": self.sample_count,
            "sum_mean": self.mean,
            "sum_std": self.std,
        }


def ks_normality(sums: np.ndarray) -> CltResult:
    """Standardise by the sample mean and deviation, then KS against N(0, 1)."""

    mean = shifted_mean(sums)
    std = math.sqrt(math.fsum((sums - mean) ** 2) / (sums.size - 1))
    if std == 0.0:
        raise DegeneracyError("Birkhoff sums have zero variance; the CLT diagnostic is undefined")
    result = stats.kstest((sums - mean) / std, "norm", method="asymp")
    return CltResult(float(result.statistic), float(result.pvalue), int(sums.size), mean, std)


def clt_diagnostic(
    phi: Callable[[np.ndarray], np.ndarray],
    system: DynamicalSystem,
    n: int,
    spec: EnsembleSpec,
) -> CltResult:
    if n < MIN_WINDOW:
        raise ParameterError(f"n must be ≥ {MIN_WINDOW}, got {n}")
    if spec.sample_count < MIN_CLT_SAMPLES:
        raise ParameterError(f"sample_count must be ≥ {MIN_CLT_SAMPLES}, got {spec.sample_count}")
    if spec.system != system:
        raise PreconditionError(f"ensemble is for '{spec.system.name}', not '{system.name}'")

    def birkhoff_sums(windows: np.ndarray) -> np.ndarray:
        return np.sum(phi(windows), axis=1)

    if spec.method == METHOD_BATCH:
        orbit = long_orbit(spec, spec.sample_count * n)
        # Consecutive non-overlapping windows along the orbit.
        sums = np.sum(phi(orbit.reshape(spec.sample_count, n)), axis=1)
    else:
        sums, _ = map_blocks(spec, n, birkhoff_sums)
    return ks_normality(sums)


def gaussian_control(sample_count: int, seed: int) -> np.ndarray:
    """Independent standard normal draws: a stream for which the KS null holds exactly."""

    if sample_count < 2:
        raise ParameterError(f"sample_count must be ≥ 2, got {sample_count}")
    return block_rng(seed, 0).standard_normal(sample_count)


def control_diagnostic(sample_count: int, seed: int) -> CltResult:
    return ks_normality(gaussian_control(sample_count, seed))


