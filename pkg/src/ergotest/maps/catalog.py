"""Built-in dynamical systems: parameter handling, exact step formulas and derivative data."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from types import MappingProxyType
from typing import Callable, Dict, Mapping, Optional, Sequence, Tuple

import numpy as np

from ergotest.core.errors import CapabilityError, ParameterError

Bounds = Tuple[Tuple[float, float], ...]

UNIT_INTERVAL: Bounds = ((0.0, 1.0),)
PLANE: Bounds = ((-math.inf, math.inf), (-math.inf, math.inf))

# Word width of the digit-refresh lift used for dyadic maps.
LIFT_BITS = 53
LIFT_MASK = np.uint64((1 << LIFT_BITS) - 1)
LIFT_SCALE = 2.0 ** -LIFT_BITS


@dataclass(frozen=True)
class MonotoneBranch:
    """A monotone piece of a one-dimensional map together with its inverse."""

    lo: float
    hi: float
    forward: Callable[[np.ndarray], np.ndarray]
    inverse: Callable[[np.ndarray], np.ndarray]
    increasing: bool


@dataclass(frozen=True)
class LinearBranch:
    """Exact affine branch ``x -> slope * x + intercept`` on ``[lo, hi)``."""

    lo: Fraction
    hi: Fraction
    slope: int
    intercept: Fraction

    def contains(self, left: Fraction, right: Fraction) -> bool:
        return self.lo <= left and right <= self.hi

    def apply(self, x: Fraction) -> Fraction:
        return self.slope * x + self.intercept


class DynamicalSystem:
    """Base class for catalog systems.

    Subclasses define the class attributes and implement :meth:`step`, which
    evolves a whole batch of states (shape ``(m,)`` for interval maps and
    ``(m, 2)`` for planar maps) by one iteration.
    """

    name: str = ""
    state_dim: int = 1
    defaults: Mapping[str, float] = MappingProxyType({})
    domain: Bounds = UNIT_INTERVAL
    description: str = ""
    has_jacobian: bool = True
    divergence_threshold: float = math.inf
    attractor_box: Optional[Bounds] = None
    default_burn_in: int = 1000

    __slots__ = ("_params",)

    def __init__(self, **params: float) -> None:
        unknown = sorted(set(params) - set(self.defaults))
        if unknown:
            valid = ", ".join(sorted(self.defaults)) or "(none)"
            raise ParameterError(
                f"Unknown parameter(s) {', '.join(unknown)} for system '{self.name}'. Valid parameters: {valid}"
            )
        merged: Dict[str, float] = dict(self.defaults)
        for key, value in params.items():
            number = float(value)
            if not math.isfinite(number):
                raise ParameterError(f"Parameter '{key}' of system '{self.name}' must be finite")
            merged[key] = number
        self._params = MappingProxyType(merged)
        self._validate_params()

    def _validate_params(self) -> None:
        return None

    @property
    def params(self) -> Mapping[str, float]:
        return self._params

    @property
    def is_interval_map(self) -> bool:
        return self.state_dim == 1

    def describe(self) -> Dict[str, object]:
        return {"system": self.name, "params": dict(self._params)}

    def __repr__(self) -> str:
        args = ", ".join(f"{k}={v!r}" for k, v in self._params.items())
        return f"{type(self).__name__}({args})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DynamicalSystem):
            return NotImplemented
        return self.name == other.name and dict(self._params) == dict(other._params)

    def __hash__(self) -> int:
        return hash((self.name, tuple(sorted(self._params.items()))))

    # --- evolution -----------------------------------------------------

    def step(self, states: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def in_domain(self, states: np.ndarray) -> np.ndarray:
        arr = np.asarray(states, dtype=np.float64)
        if self.state_dim == 1:
            lo, hi = self.domain[0]
            return np.isfinite(arr) & (arr >= lo) & (arr <= hi)
        ok = np.all(np.isfinite(arr), axis=-1)
        for axis, (lo, hi) in enumerate(self.domain):
            ok &= (arr[..., axis] >= lo) & (arr[..., axis] <= hi)
        return ok

    def escaped(self, states: np.ndarray) -> np.ndarray:
        """Mask of states that count as diverged."""

        arr = np.asarray(states, dtype=np.float64)
        if self.state_dim == 1:
            return ~np.isfinite(arr)
        finite = np.all(np.isfinite(arr), axis=-1)
        with np.errstate(invalid="ignore", over="ignore"):
            large = np.any(np.abs(arr) > self.divergence_threshold, axis=-1)
        return ~finite | large

    # --- derivative data -------------------------------------------------

    def jacobian(self, state: np.ndarray) -> np.ndarray:
        raise CapabilityError(f"System '{self.name}' provides no Jacobian")

    def singular(self, state: np.ndarray) -> bool:
        """True on the measure-zero set where the map is not differentiable."""

        return False

    # --- structure used by transfer / tower / montecarlo -------------------

    def monotone_branches(self) -> Sequence[MonotoneBranch]:
        raise CapabilityError(f"System '{self.name}' is not a piecewise monotone interval map")

    def linear_branches(self) -> Sequence[LinearBranch]:
        raise CapabilityError(
            f"System '{self.name}' is not a piecewise-linear Markov map with dyadic branch points"
        )

    @property
    def supports_lift(self) -> bool:
        return False

    def dyadic_lift(self, words: np.ndarray, bits: np.ndarray) -> np.ndarray:
        raise CapabilityError(f"System '{self.name}' has no exact digit-refresh lift")

    def invariant_cdf(self, x: np.ndarray) -> Optional[np.ndarray]:
        """Exact CDF of the absolutely continuous invariant law, when known."""

        return None


def _unit_boundary(values: np.ndarray) -> np.ndarray:
    # Interval maps land in [0, 1]; the point 1 is identified with 0.
    return np.where(values >= 1.0, values - 1.0, values)


class Doubling(DynamicalSystem):
    name = "doubling"
    description = "x -> 2x mod 1"
    default_burn_in = 0
    __slots__ = ()

    def step(self, states: np.ndarray) -> np.ndarray:
        doubled = 2.0 * np.asarray(states, dtype=np.float64)
        return doubled - np.floor(doubled)

    def jacobian(self, state: np.ndarray) -> np.ndarray:
        return np.array([[2.0]])

    def monotone_branches(self) -> Sequence[MonotoneBranch]:
        return (
            MonotoneBranch(0.0, 0.5, lambda x: 2.0 * x, lambda y: 0.5 * y, True),
            MonotoneBranch(0.5, 1.0, lambda x: 2.0 * x - 1.0, lambda y: 0.5 * (y + 1.0), True),
        )

    def linear_branches(self) -> Sequence[LinearBranch]:
        half = Fraction(1, 2)
        return (
            LinearBranch(Fraction(0), half, 2, Fraction(0)),
            LinearBranch(half, Fraction(1), 2, Fraction(-1)),
        )

    @property
    def supports_lift(self) -> bool:
        return True

    def dyadic_lift(self, words: np.ndarray, bits: np.ndarray) -> np.ndarray:
        return ((words << np.uint64(1)) & LIFT_MASK) | bits

    def invariant_cdf(self, x: np.ndarray) -> Optional[np.ndarray]:
        return np.clip(np.asarray(x, dtype=np.float64), 0.0, 1.0)


class Tent(DynamicalSystem):
    name = "tent"
    description = "x -> 1 - |1 - 2x|"
    default_burn_in = 0
    __slots__ = ()

    def step(self, states: np.ndarray) -> np.ndarray:
        x = np.asarray(states, dtype=np.float64)
        return _unit_boundary(1.0 - np.abs(1.0 - 2.0 * x))

    def jacobian(self, state: np.ndarray) -> np.ndarray:
        x = float(np.asarray(state).reshape(-1)[0])
        return np.array([[2.0 if x < 0.5 else -2.0]])

    def singular(self, state: np.ndarray) -> bool:
        return float(np.asarray(state).reshape(-1)[0]) == 0.5

    def monotone_branches(self) -> Sequence[MonotoneBranch]:
        return (
            MonotoneBranch(0.0, 0.5, lambda x: 2.0 * x, lambda y: 0.5 * y, True),
            MonotoneBranch(0.5, 1.0, lambda x: 2.0 - 2.0 * x, lambda y: 1.0 - 0.5 * y, False),
        )

    def linear_branches(self) -> Sequence[LinearBranch]:
        half = Fraction(1, 2)
        return (
            LinearBranch(Fraction(0), half, 2, Fraction(0)),
            LinearBranch(half, Fraction(1), -2, Fraction(2)),
        )

    @property
    def supports_lift(self) -> bool:
        return True

    def dyadic_lift(self, words: np.ndarray, bits: np.ndarray) -> np.ndarray:
        # Left half: 2w + b.  Right half: the fold 2 - 2x read through the window,
        # 2^54 - 2w - 1 - b, which stays inside [0, 2^53).
        top = words >> np.uint64(LIFT_BITS - 1)
        left = (words << np.uint64(1)) | bits
        right = np.uint64(1 << (LIFT_BITS + 1)) - (words << np.uint64(1)) - np.uint64(1) - bits
        return np.where(top == 0, left, right) & LIFT_MASK

    def invariant_cdf(self, x: np.ndarray) -> Optional[np.ndarray]:
        return np.clip(np.asarray(x, dtype=np.float64), 0.0, 1.0)


class Logistic(DynamicalSystem):
    name = "logistic"
    description = "x -> a x (1 - x)"
    defaults = MappingProxyType({"a": 4.0})
    __slots__ = ()

    def _validate_params(self) -> None:
        a = self.params["a"]
        if not 0.0 < a <= 4.0:
            raise ParameterError(f"logistic parameter a must lie in (0, 4], got {a}")

    def step(self, states: np.ndarray) -> np.ndarray:
        x = np.asarray(states, dtype=np.float64)
        return _unit_boundary(self.params["a"] * x * (1.0 - x))

    def jacobian(self, state: np.ndarray) -> np.ndarray:
        x = float(np.asarray(state).reshape(-1)[0])
        return np.array([[self.params["a"] * (1.0 - 2.0 * x)]])

    def monotone_branches(self) -> Sequence[MonotoneBranch]:
        a = self.params["a"]

        def forward(x: np.ndarray) -> np.ndarray:
            return a * x * (1.0 - x)

        def root(y: np.ndarray) -> np.ndarray:
            return np.sqrt(np.clip(1.0 - 4.0 * np.asarray(y) / a, 0.0, 1.0))

        return (
            MonotoneBranch(0.0, 0.5, forward, lambda y: 0.5 * (1.0 - root(y)), True),
            MonotoneBranch(0.5, 1.0, forward, lambda y: 0.5 * (1.0 + root(y)), False),
        )

    def invariant_cdf(self, x: np.ndarray) -> Optional[np.ndarray]:
        if self.params["a"] != 4.0:
            return None
        clipped = np.clip(np.asarray(x, dtype=np.float64), 0.0, 1.0)
        return (2.0 / math.pi) * np.arcsin(np.sqrt(clipped))


class Lozi(DynamicalSystem):
    name = "lozi"
    description = "(x, y) -> (1 + y - a|x|, b x)"
    state_dim = 2
    defaults = MappingProxyType({"a": 1.7, "b": 0.5})
    domain = PLANE
    divergence_threshold = 1e3
    attractor_box = ((0.35, 0.55), (0.15, 0.3))
    __slots__ = ()

    def step(self, states: np.ndarray) -> np.ndarray:
        s = np.asarray(states, dtype=np.float64)
        x, y = s[..., 0], s[..., 1]
        with np.errstate(over="ignore", invalid="ignore"):
            return np.stack((1.0 + y - self.params["a"] * np.abs(x), self.params["b"] * x), axis=-1)

    def jacobian(self, state: np.ndarray) -> np.ndarray:
        x = float(np.asarray(state)[0])
        # One-sided derivative from the right on the line x = 0.
        sign = -1.0 if x < 0.0 else 1.0
        return np.array([[-self.params["a"] * sign, 1.0], [self.params["b"], 0.0]])

    def singular(self, state: np.ndarray) -> bool:
        return float(np.asarray(state)[0]) == 0.0


class Henon(DynamicalSystem):
    name = "henon"
    description = "(x, y) -> (1 + y - a x^2, b x)"
    state_dim = 2
    defaults = MappingProxyType({"a": 1.4, "b": 0.3})
    domain = PLANE
    divergence_threshold = 1e3
    # Inside the classical trapping quadrilateral for (a, b) = (1.4, 0.3).
    attractor_box = ((-1.0, 1.0), (-0.1, 0.1))
    __slots__ = ()

    def step(self, states: np.ndarray) -> np.ndarray:
        s = np.asarray(states, dtype=np.float64)
        x, y = s[..., 0], s[..., 1]
        with np.errstate(over="ignore", invalid="ignore"):
            return np.stack((1.0 + y - self.params["a"] * x * x, self.params["b"] * x), axis=-1)

    def jacobian(self, state: np.ndarray) -> np.ndarray:
        x = float(np.asarray(state)[0])
        return np.array([[-2.0 * self.params["a"] * x, 1.0], [self.params["b"], 0.0]])


BUILTIN_SYSTEM_CLASSES: Tuple[type, ...] = (Doubling, Tent, Logistic, Lozi, Henon)

_SYSTEM_REGISTRY: Dict[str, type] = {}


def _populate_registry() -> None:
    if _SYSTEM_REGISTRY:
        return
    for cls in BUILTIN_SYSTEM_CLASSES:
        _SYSTEM_REGISTRY.setdefault(cls.name, cls)


def register_system(cls: type) -> type:
    """Add a system class to the catalog (used by plugins); returns ``cls``."""

    if not (isinstance(cls, type) and issubclass(cls, DynamicalSystem)) or not cls.name:
        raise TypeError("register_system expects a named DynamicalSystem subclass")
    _populate_registry()
    _SYSTEM_REGISTRY[cls.name.lower()] = cls
    return cls


def available_systems() -> Tuple[str, ...]:
    _populate_registry()
    return tuple(sorted(_SYSTEM_REGISTRY))


def system_class(name: str) -> type:
    _populate_registry()
    cls = _SYSTEM_REGISTRY.get(str(name).lower())
    if cls is None:
        supported = ", ".join(available_systems())
        raise ParameterError(f"Unknown system '{name}'. Supported systems: {supported}")
    return cls


def make_system(name: str, params: Optional[Mapping[str, float]] = None) -> DynamicalSystem:
    """Instantiate a catalog system by name with optional parameter overrides."""

    return system_class(name)(**dict(params or {}))
