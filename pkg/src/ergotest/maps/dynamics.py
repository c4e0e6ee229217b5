"""Orbit evolution and hyperbolicity diagnostics for catalog systems."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Union

import numpy as np

from ergotest.core.errors import CapabilityError, DegeneracyError, DivergenceError, DomainError, ParameterError

from .catalog import Bounds, DynamicalSystem

logger = logging.getLogger(__name__)

State = Union[float, np.ndarray]
StateSampler = Callable[[np.random.Generator, int], np.ndarray]

MIN_LYAPUNOV_STEPS = 100


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Consecutive states ``f^burn_in(seed), ..., f^(burn_in+len-1)(seed)``."""

    system: DynamicalSystem
    states: np.ndarray
    burn_in: int
    seed_state: State

    def __post_init__(self) -> None:
        self.states.setflags(write=False)

    def __len__(self) -> int:
        return int(self.states.shape[0])

    def __getitem__(self, index: int) -> State:
        value = self.states[index]
        return float(value) if self.system.is_interval_map else np.array(value)


def _as_state(system: DynamicalSystem, state: State) -> np.ndarray:
    arr = np.asarray(state, dtype=np.float64)
    if arr.shape != (system.state_dim,) and not (system.state_dim == 1 and arr.shape == ()):
        raise DomainError(
            f"System '{system.name}' expects a state of dimension {system.state_dim}, got shape {arr.shape}"
        )
    arr = arr.reshape(1, system.state_dim) if system.state_dim > 1 else arr.reshape(1)
    if not bool(system.in_domain(arr)[0]):
        raise DomainError(f"State {state!r} lies outside the domain of '{system.name}'")
    if system.is_interval_map:
        # Boundary rule: the point 1 is identified with 0.
        arr = np.where(arr >= 1.0, 0.0, arr)
    return arr


def _as_output(system: DynamicalSystem, batch: np.ndarray) -> State:
    return float(batch[0]) if system.is_interval_map else batch[0].copy()


def _advance(system: DynamicalSystem, batch: np.ndarray, start: int, steps: int) -> np.ndarray:
    for k in range(start + 1, start + steps + 1):
        batch = system.step(batch)
        if bool(system.escaped(batch)[0]):
            raise DivergenceError(f"Orbit of '{system.name}' diverged", step=k)
    return batch


def evolve(system: DynamicalSystem, state: State, steps: int) -> State:
    """Return ``f^steps(state)`` by iterated exact evaluation."""

    if steps < 1:
        raise ParameterError(f"steps must be ≥ 1, got {steps}")
    return _as_output(system, _advance(system, _as_state(system, state), 0, steps))


def orbit(system: DynamicalSystem, seed: State, burn_in: int, length: int) -> Trajectory:
    if burn_in < 0:
        raise ParameterError(f"burn_in must be ≥ 0, got {burn_in}")
    if length < 1:
        raise ParameterError(f"length must be ≥ 1, got {length}")
    batch = _as_state(system, seed)
    if burn_in:
        batch = _advance(system, batch, 0, burn_in)
    shape = (length,) if system.is_interval_map else (length, system.state_dim)
    states = np.empty(shape, dtype=np.float64)
    states[0] = batch[0]
    for k in range(1, length):
        batch = _advance(system, batch, burn_in + k - 1, 1)
        states[k] = batch[0]
    seed_state = float(np.asarray(seed)) if system.is_interval_map else np.array(seed, dtype=np.float64)
    return Trajectory(system=system, states=states, burn_in=burn_in, seed_state=seed_state)


def lyapunov_spectrum(system: DynamicalSystem, seed: State, steps: int) -> List[float]:
    """Lyapunov exponents in decreasing order via QR re-orthonormalisation of a tangent frame."""

    if not system.has_jacobian:
        raise CapabilityError(f"System '{system.name}' provides no Jacobian")
    if steps < MIN_LYAPUNOV_STEPS:
        raise ParameterError(f"steps must be ≥ {MIN_LYAPUNOV_STEPS}, got {steps}")

    dim = system.state_dim
    batch = _as_state(system, seed)
    frame = np.eye(dim)
    logs = np.empty((steps, dim), dtype=np.float64)
    singular_hits = 0
    for k in range(steps):
        point = batch[0] if dim > 1 else batch
        if system.singular(point):
            singular_hits += 1
        tangent = system.jacobian(point) @ frame
        if dim == 1:
            stretch = np.abs(tangent[0])
        else:
            frame, upper = np.linalg.qr(tangent)
            stretch = np.abs(np.diagonal(upper))
        if np.any(stretch == 0.0):
            raise DegeneracyError(f"Tangent frame collapsed for '{system.name}' at step {k}")
        logs[k] = np.log(stretch)
        batch = _advance(system, batch, k, 1)

    if singular_hits:
        logger.info("%s: orbit hit the non-differentiable set %d time(s)", system.name, singular_hits)
    exponents = [math.fsum(logs[:, i]) / steps for i in range(dim)]
    return sorted(exponents, reverse=True)


def uniform_sampler(system: DynamicalSystem, box: Optional[Bounds] = None) -> StateSampler:
    """State source drawing uniformly from the domain (interval maps) or an attractor box."""

    bounds = box
    if bounds is None:
        bounds = system.domain if system.is_interval_map else system.attractor_box
    if bounds is None or not all(math.isfinite(lo) and math.isfinite(hi) for lo, hi in bounds):
        raise CapabilityError(f"System '{system.name}' has no bounded box to sample from")
    lows = np.array([lo for lo, _ in bounds])
    widths = np.array([hi - lo for lo, hi in bounds])

    def sample(rng: np.random.Generator, size: int) -> np.ndarray:
        draws = lows + widths * rng.random((size, len(bounds)))
        if system.is_interval_map:
            return draws[:, 0]
        return draws

    return sample
