"""Deterministic ensemble sampling of orbit windows under the invariant measure."""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterator, List, Optional, Tuple

import numpy as np

from ergotest.core.errors import ParameterError, SamplingError
from ergotest.core.models import METHOD_BATCH, METHOD_IID
from ergotest.maps.catalog import LIFT_BITS, LIFT_SCALE, DynamicalSystem
from ergotest.maps.dynamics import uniform_sampler
from ergotest.observables.observable import observed_coordinate

logger = logging.getLogger(__name__)

SEED_UNIFORM = "uniform"
SEED_ATTRACTOR_BOX = "attractor_box"
SEED_DISTRIBUTIONS = (SEED_UNIFORM, SEED_ATTRACTOR_BOX)
METHODS = (METHOD_IID, METHOD_BATCH)

# Samples per RNG stream; estimates depend only on master_seed and this constant.
BLOCK_SIZE = 1024
MAX_DISCARD_FRACTION = 0.01
SAMPLER_LIFT = "digit-refresh"
SAMPLER_FLOAT = "float-orbit"


@dataclass(frozen=True)
class EnsembleSpec:
    system: DynamicalSystem
    sample_count: int
    burn_in: Optional[int] = None
    seed_distribution: Optional[str] = None
    master_seed: int = 0
    method: str = METHOD_IID
    workers: int = field(default=1, compare=False)

    def __post_init__(self) -> None:
        if self.sample_count < 1:
            raise ParameterError(f"sample_count must be ≥ 1, got {self.sample_count}")
        if self.burn_in is None:
            object.__setattr__(self, "burn_in", self.system.default_burn_in)
        elif self.burn_in < 0:
            raise ParameterError(f"burn_in must be ≥ 0, got {self.burn_in}")
        if self.seed_distribution is None:
            default = SEED_UNIFORM if self.system.is_interval_map else SEED_ATTRACTOR_BOX
            object.__setattr__(self, "seed_distribution", default)
        if self.seed_distribution not in SEED_DISTRIBUTIONS:
            raise ParameterError(
                f"seed_distribution must be one of {', '.join(SEED_DISTRIBUTIONS)}, got '{self.seed_distribution}'"
            )
        if self.seed_distribution == SEED_ATTRACTOR_BOX and self.system.attractor_box is None:
            raise ParameterError(f"System '{self.system.name}' has no attractor box")
        if not 0 <= self.master_seed < 2**64:
            raise ParameterError(f"master_seed must be a 64-bit unsigned integer, got {self.master_seed}")
        if self.method not in METHODS:
            raise ParameterError(f"method must be one of {', '.join(METHODS)}, got '{self.method}'")
        if self.workers < 1:
            raise ParameterError(f"workers must be ≥ 1, got {self.workers}")

    @property
    def uses_lift(self) -> bool:
        return self.system.supports_lift and self.seed_distribution == SEED_UNIFORM

    @property
    def sampler_name(self) -> str:
        return SAMPLER_LIFT if self.uses_lift else SAMPLER_FLOAT

    @property
    def block_count(self) -> int:
        return -(-self.sample_count // BLOCK_SIZE)

    def block_size(self, block: int) -> int:
        return min(BLOCK_SIZE, self.sample_count - block * BLOCK_SIZE)


def block_rng(master_seed: int, block: int) -> np.random.Generator:
    """Counter-based stream owned by one block of consecutive sample indices."""

    return np.random.Generator(np.random.Philox(np.random.SeedSequence(master_seed, spawn_key=(block,))))


class _LiftStream:
    """Exact orbit of Lebesgue-random points read through a 53-bit window."""

    def __init__(self, system: DynamicalSystem, rng: np.random.Generator, size: int) -> None:
        self._system = system
        self._rng = rng
        self.words = rng.integers(0, 2**LIFT_BITS, size=size, dtype=np.uint64)

    def advance(self) -> None:
        bits = self._rng.integers(0, 2, size=self.words.size, dtype=np.uint64)
        self.words = self._system.dyadic_lift(self.words, bits)

    def coordinates(self) -> np.ndarray:
        return self.words.astype(np.float64) * LIFT_SCALE


class _FloatStream:
    """Float orbits; escaping members are frozen and reported as discarded."""

    def __init__(self, spec: EnsembleSpec, rng: np.random.Generator, size: int) -> None:
        system = spec.system
        box = system.attractor_box if spec.seed_distribution == SEED_ATTRACTOR_BOX else None
        self._system = system
        self.states = uniform_sampler(system, box)(rng, size)
        self.alive = np.ones(size, dtype=bool)
        self._parking = self.states[0].copy() if size else None

    def advance(self) -> None:
        self.states = self._system.step(self.states)
        escaped = self._system.escaped(self.states)
        if np.any(escaped & self.alive):
            self.alive &= ~escaped
            # Park dead members on a finite state so they cannot overflow later steps.
            self.states[escaped] = self._parking

    def coordinates(self) -> np.ndarray:
        return observed_coordinate(self.states, self._system.state_dim)


def _stream(spec: EnsembleSpec, rng: np.random.Generator, size: int):
    if spec.uses_lift:
        return _LiftStream(spec.system, rng, size)
    return _FloatStream(spec, rng, size)


def sample_block(spec: EnsembleSpec, length: int, block: int) -> Tuple[np.ndarray, int]:
    """Windows of ``length`` observed coordinates for one block, plus its discard count."""

    size = spec.block_size(block)
    stream = _stream(spec, block_rng(spec.master_seed, block), size)
    for _ in range(spec.burn_in):
        stream.advance()
    windows = np.empty((size, length), dtype=np.float64)
    windows[:, 0] = stream.coordinates()
    for k in range(1, length):
        stream.advance()
        windows[:, k] = stream.coordinates()
    alive = getattr(stream, "alive", None)
    if alive is None:
        return windows, 0
    return windows[alive], int(size - np.count_nonzero(alive))


def map_blocks(spec: EnsembleSpec, length: int, reduce: Callable[[np.ndarray], np.ndarray]) -> Tuple[np.ndarray, int]:
    """Apply ``reduce`` to every block of windows and concatenate in block order."""

    def work(block: int) -> Tuple[np.ndarray, int]:
        windows, discarded = sample_block(spec, length, block)
        return np.asarray(reduce(windows)), discarded

    blocks = range(spec.block_count)
    if spec.workers > 1 and spec.block_count > 1:
        with ThreadPoolExecutor(max_workers=spec.workers) as pool:
            results: List[Tuple[np.ndarray, int]] = list(pool.map(work, blocks))
    else:
        results = [work(block) for block in blocks]
    discarded = sum(count for _, count in results)
    _check_discards(spec, discarded)
    return np.concatenate([values for values, _ in results], axis=0), discarded


def long_orbit(spec: EnsembleSpec, length: int) -> np.ndarray:
    """One burned-in orbit of ``length`` observed coordinates (batch-means mode)."""

    stream = _stream(spec, block_rng(spec.master_seed, 0), 1)
    for _ in range(spec.burn_in):
        stream.advance()
    values = np.empty(length, dtype=np.float64)
    values[0] = stream.coordinates()[0]
    for k in range(1, length):
        stream.advance()
        values[k] = stream.coordinates()[0]
    alive = getattr(stream, "alive", None)
    if alive is not None and not alive[0]:
        raise SamplingError(f"Long orbit of '{spec.system.name}' diverged")
    return values


def sliding_blocks(values: np.ndarray, length: int, count: int) -> Iterator[np.ndarray]:
    """Overlapping windows ``values[t : t + length]`` for ``t < count``, in chunks."""

    view = np.lib.stride_tricks.sliding_window_view(values, length)
    for start in range(0, count, BLOCK_SIZE):
        yield np.ascontiguousarray(view[start : min(start + BLOCK_SIZE, count)])


def _check_discards(spec: EnsembleSpec, discarded: int) -> None:
    if discarded:
        logger.info("%s: discarded %d of %d divergent samples", spec.system.name, discarded, spec.sample_count)
    if discarded > MAX_DISCARD_FRACTION * spec.sample_count:
        raise SamplingError(
            f"{discarded} of {spec.sample_count} samples of '{spec.system.name}' diverged "
            f"(limit {MAX_DISCARD_FRACTION:.0%})"
        )
