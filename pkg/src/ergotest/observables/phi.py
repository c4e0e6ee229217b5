"""Catalog of one-variable Hölder functions used to build observables."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from ergotest.core.errors import ParameterError

ArrayFunc = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class PhiFunction:
    """``func`` with exponent ``eta``, Hölder constant ``holder`` and sup-norm ``sup_norm`` on ``support``."""

    name: str
    func: ArrayFunc
    eta: float
    holder: float
    sup_norm: float
    support: Tuple[float, float] = (-math.inf, math.inf)
    exact: bool = True
    constant: Optional[float] = None
    description: str = ""

    def __post_init__(self) -> None:
        if not 0.0 < self.eta <= 1.0:
            raise ParameterError(f"eta must lie in (0, 1], got {self.eta}")
        for label, value in (("Hölder constant", self.holder), ("sup-norm", self.sup_norm)):
            if not math.isfinite(value) or value < 0:
                raise ParameterError(f"{label} of phi '{self.name}' must be finite and ≥ 0, got {value}")

    def __call__(self, values: np.ndarray) -> np.ndarray:
        if self.constant is not None:
            return np.full(np.shape(values), self.constant, dtype=np.float64)
        return np.asarray(self.func(np.asarray(values, dtype=np.float64)), dtype=np.float64)

    @property
    def bounded_support(self) -> bool:
        lo, hi = self.support
        return math.isfinite(lo) and math.isfinite(hi)

    def describe(self) -> Dict[str, object]:
        return {
            "name": self.name,
            "eta": self.eta,
            "holder": self.holder,
            "sup_norm": self.sup_norm,
            "support": list(self.support),
            "exact": self.exact,
        }


def _cos2pi(x: np.ndarray) -> np.ndarray:
    return np.cos(2.0 * math.pi * x)


def _identity(x: np.ndarray) -> np.ndarray:
    return x


def _sqrt(x: np.ndarray) -> np.ndarray:
    return np.sqrt(np.clip(x, 0.0, None))


def _abs_dist_half(x: np.ndarray) -> np.ndarray:
    return np.abs(x - 0.5)


BUILTIN_PHI: Tuple[PhiFunction, ...] = (
    PhiFunction("cos2pi", _cos2pi, 1.0, 2.0 * math.pi, 1.0, description="cos(2 pi x)"),
    PhiFunction("identity", _identity, 1.0, 1.0, 1.0, (0.0, 1.0), description="x on [0, 1]"),
    PhiFunction("sqrt", _sqrt, 0.5, 1.0, 1.0, (0.0, 1.0), description="sqrt(x) on [0, 1]"),
    PhiFunction("abs_dist_half", _abs_dist_half, 1.0, 1.0, 0.5, (0.0, 1.0), description="|x - 1/2| on [0, 1]"),
)

_PHI_REGISTRY: Dict[str, PhiFunction] = {}


def _populate_registry() -> None:
    if _PHI_REGISTRY:
        return
    for phi in BUILTIN_PHI:
        _PHI_REGISTRY.setdefault(phi.name, phi)


def register_phi(phi: PhiFunction) -> PhiFunction:
    _populate_registry()
    _PHI_REGISTRY[phi.name.lower()] = phi
    return phi


def available_phi() -> Tuple[str, ...]:
    _populate_registry()
    return tuple(sorted(_PHI_REGISTRY))


def get_phi(name: str) -> PhiFunction:
    _populate_registry()
    phi = _PHI_REGISTRY.get(str(name).lower())
    if phi is None:
        raise ParameterError(f"Unknown phi '{name}'. Available: {', '.join(available_phi())}")
    return phi


def constant_phi(value: float) -> PhiFunction:
    """The constant function ``value`` (Hölder constant 0 for every exponent)."""

    value = float(value)
    if not math.isfinite(value):
        raise ParameterError(f"constant value must be finite, got {value}")
    return PhiFunction(
        name=f"constant({value!r})",
        func=lambda x: np.full(np.shape(x), value),
        eta=1.0,
        holder=0.0,
        sup_norm=abs(value),
        constant=value,
    )
