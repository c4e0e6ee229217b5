"""Separately Hölder observables of ``n`` state coordinates."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Tuple

import numpy as np

from ergotest.core.errors import ArityError, ParameterError

WindowKernel = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class SeparatelyHoelderObservable:
    """A function ``K(x_1, ..., x_n)`` with per-coordinate Hölder constants.

    ``kernel`` maps an ``(m, n)`` array of observed coordinates to ``m`` values.
    ``holder_constants`` are analytic upper bounds when ``exact`` is true and
    empirical lower bounds otherwise.
    """

    arity: int
    eta: float
    holder_constants: Tuple[float, ...]
    family: str
    kernel: WindowKernel = field(repr=False)
    exact: bool = True
    phi_name: Optional[str] = None
    constant_value: Optional[float] = None
    params: Mapping[str, object] = field(default_factory=dict, compare=False)
    # Set by `scaled`: this observable equals `scale` times `unscaled`.
    scale: float = 1.0
    unscaled: Optional["SeparatelyHoelderObservable"] = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.arity < 1:
            raise ArityError(f"arity must be ≥ 1, got {self.arity}")
        if not 0.0 < self.eta <= 1.0:
            raise ParameterError(f"eta must lie in (0, 1], got {self.eta}")
        if len(self.holder_constants) != self.arity:
            raise ArityError(
                f"expected {self.arity} Hölder constants, got {len(self.holder_constants)}"
            )
        for j, value in enumerate(self.holder_constants, start=1):
            if not math.isfinite(value) or value < 0:
                raise ParameterError(f"L_{j} must be finite and ≥ 0, got {value}")

    @property
    def label(self) -> str:
        return f"{self.family}-{self.phi_name}" if self.phi_name else self.family

    @property
    def is_constant(self) -> bool:
        return self.constant_value is not None

    @property
    def sum_l2(self) -> float:
        return math.fsum(value * value for value in self.holder_constants)

    def holder_constant(self, j: int) -> float:
        """``L_j`` with the convention ``L_j = 0`` for ``j > n`` (1-based)."""

        if j < 1:
            raise ArityError(f"coordinate index must be ≥ 1, got {j}")
        return self.holder_constants[j - 1] if j <= self.arity else 0.0

    def evaluate_batch(self, windows: np.ndarray) -> np.ndarray:
        data = np.asarray(windows, dtype=np.float64)
        if data.ndim != 2 or data.shape[1] != self.arity:
            raise ArityError(f"expected windows of shape (m, {self.arity}), got {data.shape}")
        if self.constant_value is not None:
            return np.full(data.shape[0], self.constant_value, dtype=np.float64)
        return np.asarray(self.kernel(data), dtype=np.float64)

    def __call__(self, *coordinates: float) -> float:
        if len(coordinates) != self.arity:
            raise ArityError(f"expected {self.arity} coordinates, got {len(coordinates)}")
        return float(self.evaluate_batch(np.asarray(coordinates, dtype=np.float64)[None, :])[0])


def observed_coordinate(states: np.ndarray, state_dim: int) -> np.ndarray:
    """Project states onto the coordinate observables act on (the first one for planar maps)."""

    data = np.asarray(states, dtype=np.float64)
    return data if state_dim == 1 else data[..., 0]
