"""Means, variances and correlations of observables with 95% normal intervals."""
from __future__ import annotations

import logging
import math
from typing import Callable, List, Tuple

import numpy as np

from ergotest.core.errors import ParameterError, PreconditionError
from ergotest.core.models import METHOD_BATCH, EstimateWithCI
from ergotest.maps.catalog import DynamicalSystem
from ergotest.observables.observable import SeparatelyHoelderObservable

from .sampling import EnsembleSpec, long_orbit, map_blocks, sliding_blocks

logger = logging.getLogger(__name__)

MIN_SAMPLES = 100


def shifted_mean(values: np.ndarray) -> float:
    """Compensated mean that is exact when every value is equal."""

    if values.size == 0:
        raise PreconditionError("cannot average an empty sample")
    anchor = float(values[0])
    return anchor + math.fsum(values - anchor) / values.size


def _sample_sd(values: np.ndarray, mean: float) -> float:
    if values.size < 2:
        return 0.0
    return math.sqrt(math.fsum((values - mean) ** 2) / (values.size - 1))


def batch_standard_error(series: np.ndarray) -> float:
    """Standard error of the mean of a correlated series by non-overlapping batch means."""

    size = max(int(math.isqrt(series.size)), 1)
    count = series.size // size
    if count < 2:
        return 0.0
    means = series[: count * size].reshape(count, size).mean(axis=1)
    return _sample_sd(means, shifted_mean(means)) / math.sqrt(count)


def _require_samples(spec: EnsembleSpec) -> None:
    if spec.sample_count < MIN_SAMPLES:
        raise ParameterError(f"sample_count must be ≥ {MIN_SAMPLES}, got {spec.sample_count}")


def observable_values(observable: SeparatelyHoelderObservable, spec: EnsembleSpec) -> Tuple[np.ndarray, int]:
    """``K`` evaluated on every window of the ensemble, in sample-index order."""

    _require_samples(spec)
    n = observable.arity
    if spec.method == METHOD_BATCH:
        orbit = long_orbit(spec, spec.sample_count + n - 1)
        chunks = [observable.evaluate_batch(w) for w in sliding_blocks(orbit, n, spec.sample_count)]
        return np.concatenate(chunks), 0
    return map_blocks(spec, n, observable.evaluate_batch)


def mean_from_values(values: np.ndarray, spec: EnsembleSpec, discarded: int = 0) -> EstimateWithCI:
    mean = shifted_mean(values)
    if spec.method == METHOD_BATCH:
        error = batch_standard_error(values)
    else:
        error = _sample_sd(values, mean) / math.sqrt(values.size)
    return EstimateWithCI.from_standard_error(
        mean, error, values.size, method=spec.method, seed=spec.master_seed, discarded=discarded
    )


def estimate_mean(observable: SeparatelyHoelderObservable, spec: EnsembleSpec) -> EstimateWithCI:
    values, discarded = observable_values(observable, spec)
    return mean_from_values(values, spec, discarded)


def variance_from_values(values: np.ndarray, spec: EnsembleSpec, discarded: int = 0) -> EstimateWithCI:
    """Unbiased sample variance; delta-method interval from the fourth central moment."""

    m = values.size
    mean = shifted_mean(values)
    deviations = values - mean
    squares = deviations * deviations
    variance = math.fsum(squares) / (m - 1)
    if spec.method == METHOD_BATCH:
        error = batch_standard_error(squares * (m / (m - 1)))
    else:
        fourth = math.fsum(squares * squares) / m
        spread = fourth - variance * variance * (m - 3) / (m - 1)
        error = math.sqrt(max(spread, 0.0) / m)
    return EstimateWithCI.from_standard_error(
        variance, error, m, method=spec.method, seed=spec.master_seed, discarded=discarded
    )


def estimate_variance(observable: SeparatelyHoelderObservable, spec: EnsembleSpec) -> EstimateWithCI:
    values, discarded = observable_values(observable, spec)
    return variance_from_values(values, spec, discarded)


def pair_variance_from_values(values: np.ndarray, spec: EnsembleSpec, discarded: int = 0) -> EstimateWithCI:
    half = values.size // 2
    halves = 0.5 * (values[:half] - values[half : 2 * half]) ** 2
    return mean_from_values(halves, spec, discarded)


def pair_variance(observable: SeparatelyHoelderObservable, spec: EnsembleSpec) -> EstimateWithCI:
    """``var K = E[(K - K')^2] / 2`` over pairs of independent windows ``(i, i + m/2)``."""

    values, discarded = observable_values(observable, spec)
    return pair_variance_from_values(values, spec, discarded)


def empirical_correlation(
    phi: Callable[[np.ndarray], np.ndarray],
    psi: Callable[[np.ndarray], np.ndarray],
    system: DynamicalSystem,
    max_lag: int,
    spec: EnsembleSpec,
) -> List[EstimateWithCI]:
    """``C(k) = E[phi(x) psi(f^k x)] - E[phi] E[psi]`` for ``k = 0..max_lag``."""

    if max_lag < 1:
        raise ParameterError(f"max_lag must be ≥ 1, got {max_lag}")
    if spec.system != system:
        raise PreconditionError(f"ensemble is for '{spec.system.name}', not '{system.name}'")
    _require_samples(spec)
    length = max_lag + 1

    def evaluate(windows: np.ndarray) -> np.ndarray:
        return np.column_stack((phi(windows[:, 0]), psi(windows)))

    if spec.method == METHOD_BATCH:
        orbit = long_orbit(spec, spec.sample_count + max_lag)
        table = np.concatenate([evaluate(w) for w in sliding_blocks(orbit, length, spec.sample_count)])
        discarded = 0
    else:
        table, discarded = map_blocks(spec, length, evaluate)

    head = table[:, 0]
    head_centered = head - shifted_mean(head)
    estimates = []
    for k in range(length):
        tail = table[:, 1 + k]
        products = head_centered * (tail - shifted_mean(tail))
        estimates.append(mean_from_values(products, spec, discarded))
    return estimates
