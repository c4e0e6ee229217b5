"""Stationary vector, second eigenvalue and correlation decay of Ulam operators."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np

from ergotest.core.errors import ConvergenceError, PreconditionError

from .ulam import UlamOperator

logger = logging.getLogger(__name__)

MAX_ITERATIONS = 100_000
TOLERANCE = 1e-12
# Rows of the deflated block below this norm are treated as annihilated.
DROP_NORM = 1e-13
QUADRATURE_NODES = 8


@dataclass(frozen=True)
class SpectralGap:
    lambda2: float
    gap: float
    iterations: int


def stationary_density(op: UlamOperator) -> np.ndarray:
    """Left fixed probability vector by power iteration from the uniform vector."""

    transposed = op.matrix.T.tocsr()
    current = np.full(op.bins, 1.0 / op.bins)
    residual = math.inf
    for iteration in range(1, MAX_ITERATIONS + 1):
        updated = transposed @ current
        updated /= updated.sum()
        residual = float(np.abs(updated - current).sum())
        current = updated
        if residual <= TOLERANCE:
            logger.debug("stationary vector converged after %d iterations", iteration)
            current.setflags(write=False)
            return current
    raise ConvergenceError(f"Stationary density did not converge in {MAX_ITERATIONS} iterations", residual)


def _orthonormal_rows(block: np.ndarray) -> np.ndarray:
    kept: List[np.ndarray] = []
    for row in block:
        vector = row.copy()
        for basis in kept:
            vector -= (vector @ basis) * basis
        norm = float(np.linalg.norm(vector))
        if norm > DROP_NORM:
            kept.append(vector / norm)
    if not kept:
        return np.empty((0, block.shape[1]))
    return np.vstack(kept)


def _deflate(block: np.ndarray, stationary: np.ndarray) -> np.ndarray:
    # Project onto zero-sum vectors, the complement of the fixed vector.
    return block - block.sum(axis=1, keepdims=True) * stationary[None, :]


def spectral_gap(op: UlamOperator) -> SpectralGap:
    """Modulus of the second eigenvalue by deflated two-vector subspace iteration.

    A block of two left vectors resolves complex conjugate pairs; the Ritz
    values of the projected 2x2 matrix give the modulus.
    """

    n = op.bins
    if n == 1:
        return SpectralGap(0.0, 1.0, 0)
    stationary = op.stationary
    transposed = op.matrix.T.tocsr()
    width = min(2, n - 1)
    start = np.random.default_rng(12345).standard_normal((width, n))
    block = _orthonormal_rows(_deflate(start, stationary))

    estimate = math.inf
    for iteration in range(1, MAX_ITERATIONS + 1):
        if block.shape[0] == 0:
            return SpectralGap(0.0, 1.0, iteration)
        image = _deflate((transposed @ block.T).T, stationary)
        ritz = np.linalg.eigvals(image @ block.T)
        updated = float(np.max(np.abs(ritz))) if ritz.size else 0.0
        block = _orthonormal_rows(image)
        if block.shape[0] == 0:
            logger.debug("deflated block annihilated after %d iterations", iteration)
            return SpectralGap(0.0, 1.0, iteration)
        if abs(updated - estimate) <= TOLERANCE:
            value = min(max(updated, 0.0), 1.0)
            logger.debug("lambda2=%.12g after %d iterations", value, iteration)
            return SpectralGap(value, 1.0 - value, iteration)
        estimate = updated
    raise ConvergenceError(f"Second eigenvalue did not converge in {MAX_ITERATIONS} iterations")


def bin_averages(op: UlamOperator, func: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Gauss-Legendre average of ``func`` over each bin."""

    if op.edges is None:
        raise PreconditionError("bin averages need an interval operator")
    nodes, weights = np.polynomial.legendre.leggauss(QUADRATURE_NODES)
    left, right = op.edges[:-1], op.edges[1:]
    mid, half = 0.5 * (left + right), 0.5 * (right - left)
    points = mid[:, None] + half[:, None] * nodes[None, :]
    values = np.asarray(func(points), dtype=np.float64).reshape(points.shape)
    return 0.5 * values @ weights


def operator_correlation(
    op: UlamOperator,
    phi: Callable[[np.ndarray], np.ndarray],
    psi: Callable[[np.ndarray], np.ndarray],
    max_lag: int,
) -> List[float]:
    """``C(k) = <phi, psi o f^k>_pi - <phi>_pi <psi>_pi`` through powers of the Ulam matrix."""

    if max_lag < 1:
        raise PreconditionError(f"max_lag must be ≥ 1, got {max_lag}")
    phi_bar = bin_averages(op, phi)
    psi_bar = bin_averages(op, psi)
    if np.all(phi_bar == phi_bar[0]) or np.all(psi_bar == psi_bar[0]):
        return [0.0] * (max_lag + 1)
    stationary = op.stationary
    phi_centered = phi_bar - float(stationary @ phi_bar)
    psi_centered = psi_bar - float(stationary @ psi_bar)

    transposed = op.matrix.T.tocsr()
    density = stationary * phi_centered
    correlations = [float(density @ psi_centered)]
    for _ in range(max_lag):
        density = transposed @ density
        correlations.append(float(density @ psi_centered))
    return correlations


@dataclass(frozen=True)
class DecayEnvelope:
    """Fit ``|C(k)| ≈ amplitude * rate^k`` over the lags above ``floor``."""

    amplitude: float
    rate: float
    r_squared: float
    lags: Sequence[int]


def decay_envelope(
    correlations: Sequence[float],
    *,
    floor: float = 1e-12,
    max_lag: Optional[int] = None,
) -> DecayEnvelope:
    limit = len(correlations) - 1 if max_lag is None else min(max_lag, len(correlations) - 1)
    lags = [k for k in range(1, limit + 1) if abs(correlations[k]) > floor]
    if len(lags) < 2:
        raise PreconditionError("need at least two lags above the noise floor to fit a decay rate")
    x = np.asarray(lags, dtype=np.float64)
    y = np.log(np.abs(np.asarray([correlations[k] for k in lags], dtype=np.float64)))
    slope, intercept = np.polyfit(x, y, 1)
    fitted = intercept + slope * x
    total = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 - float(np.sum((y - fitted) ** 2)) / total if total > 0 else 1.0
    return DecayEnvelope(math.exp(intercept), math.exp(slope), r_squared, tuple(lags))
