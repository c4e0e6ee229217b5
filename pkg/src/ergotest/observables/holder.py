"""Empirical Hölder constants for black-box observables."""
from __future__ import annotations

import logging
import math
from typing import Callable, Optional, Tuple

import numpy as np

from ergotest.core.errors import ArityError, ParameterError

from .families import FAMILY_BLACK_BOX
from .observable import SeparatelyHoelderObservable
from .phi import ArrayFunc, PhiFunction

logger = logging.getLogger(__name__)

MIN_PAIRS = 1000
PAIR_CHUNK = 1000
MIN_SCALE = 1e-6

CoordinateSampler = Callable[[np.random.Generator, int], np.ndarray]


def _chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(chunk,))))


def _unit_sampler(support: Tuple[float, float]) -> CoordinateSampler:
    lo, hi = support

    def sample(rng: np.random.Generator, size: int) -> np.ndarray:
        return lo + (hi - lo) * rng.random(size)

    return sample


def estimate_holder_constant(
    observable: Callable[[np.ndarray], np.ndarray],
    j: int,
    eta: float,
    sampler: Optional[CoordinateSampler] = None,
    pairs: int = MIN_PAIRS,
    *,
    arity: Optional[int] = None,
    support: Tuple[float, float] = (0.0, 1.0),
    seed: int = 0,
) -> float:
    """Sup of ``|K(x) - K(x~)| / |x_j - x~_j|^eta`` over sampled coordinate-``j`` perturbations.

    ``observable`` is either a :class:`SeparatelyHoelderObservable` or a
    function on ``(m, arity)`` windows.  Pairs are drawn in fixed chunks, so
    runs with the same seed are nested and the result is nondecreasing in
    ``pairs``.  Perturbation sizes are log-uniform in ``[1e-6, diam]``.
    """

    if not 0.0 < eta <= 1.0:
        raise ParameterError(f"eta must lie in (0, 1], got {eta}")
    if pairs < MIN_PAIRS:
        raise ParameterError(f"pairs must be ≥ {MIN_PAIRS}, got {pairs}")
    if isinstance(observable, SeparatelyHoelderObservable):
        n = observable.arity
        evaluate = observable.evaluate_batch
    else:
        if arity is None:
            raise ArityError("arity is required for a plain callable")
        n = arity
        evaluate = observable
    if not 1 <= j <= n:
        raise ArityError(f"coordinate index must lie in 1..{n}, got {j}")

    lo, hi = support
    diam = hi - lo
    if not math.isfinite(diam) or diam <= MIN_SCALE:
        raise ParameterError(f"support must be a bounded interval wider than {MIN_SCALE}, got {support}")
    draw = sampler or _unit_sampler(support)
    log_lo, log_hi = math.log(MIN_SCALE), math.log(diam)

    best = 0.0
    remaining = pairs
    chunk = 0
    while remaining > 0:
        rng = _chunk_rng(seed, chunk)
        base = np.asarray(draw(rng, PAIR_CHUNK * n), dtype=np.float64)
        if base.ndim > 1:
            base = base[:, 0]
        base = base.reshape(PAIR_CHUNK, n)
        scale = np.exp(rng.uniform(log_lo, log_hi, PAIR_CHUNK))
        sign = np.where(rng.random(PAIR_CHUNK) < 0.5, -1.0, 1.0)

        x = base[:, j - 1]
        moved = x + sign * scale
        outside = (moved < lo) | (moved > hi)
        moved = np.where(outside, x - sign * scale, moved)
        moved = np.clip(moved, lo, hi)
        perturbed = base.copy()
        perturbed[:, j - 1] = moved

        distance = np.abs(moved - x)
        delta = np.abs(evaluate(perturbed) - evaluate(base))
        take = min(remaining, PAIR_CHUNK)
        valid = distance[:take] > 0
        if np.any(valid):
            ratios = delta[:take][valid] / distance[:take][valid] ** eta
            best = max(best, float(np.max(ratios)))
        remaining -= take
        chunk += 1

    logger.debug("Hölder estimate for coordinate %d: %.6g over %d pairs", j, best, pairs)
    return best


def estimate_phi(
    name: str,
    func: ArrayFunc,
    eta: float,
    support: Tuple[float, float] = (0.0, 1.0),
    *,
    pairs: int = 10 * MIN_PAIRS,
    seed: int = 0,
) -> PhiFunction:
    """Wrap a user function as a phi with estimated (lower-bound) constants."""

    constant = estimate_holder_constant(
        lambda w: np.asarray(func(w[:, 0]), dtype=np.float64),
        1,
        eta,
        pairs=pairs,
        arity=1,
        support=support,
        seed=seed,
    )
    grid = np.linspace(support[0], support[1], 4097)
    sup_norm = float(np.max(np.abs(np.asarray(func(grid), dtype=np.float64))))
    return PhiFunction(
        name=name,
        func=func,
        eta=eta,
        holder=constant,
        sup_norm=sup_norm,
        support=support,
        exact=False,
    )


def black_box(
    kernel: Callable[[np.ndarray], np.ndarray],
    n: int,
    eta: float,
    *,
    support: Tuple[float, float] = (0.0, 1.0),
    pairs: int = MIN_PAIRS,
    seed: int = 0,
) -> SeparatelyHoelderObservable:
    """Observable from an arbitrary window function; every ``L_j`` is estimated."""

    constants = tuple(
        estimate_holder_constant(kernel, j, eta, pairs=pairs, arity=n, support=support, seed=seed)
        for j in range(1, n + 1)
    )
    return SeparatelyHoelderObservable(
        arity=n,
        eta=eta,
        holder_constants=constants,
        family=FAMILY_BLACK_BOX,
        kernel=kernel,
        exact=False,
        params={"n": n},
    )
