"""Library constructors with analytic Hölder constants, plus scaling and padding."""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from ergotest.core.errors import ArityError, BoundsError, ParameterError

from .observable import SeparatelyHoelderObservable, observed_coordinate
from .phi import PhiFunction

FAMILY_BIRKHOFF = "birkhoff"
FAMILY_PAIR = "pair_correlation"
FAMILY_WEIGHTED_SUP = "weighted_sup"
FAMILY_CONSTANT = "constant"
FAMILY_BLACK_BOX = "black_box"

FAMILIES = (FAMILY_BIRKHOFF, FAMILY_PAIR, FAMILY_WEIGHTED_SUP, FAMILY_CONSTANT)


def make_constant(value: float, n: int = 1) -> SeparatelyHoelderObservable:
    if n < 1:
        raise ArityError(f"n must be ≥ 1, got {n}")
    value = float(value)
    if not math.isfinite(value):
        raise ParameterError(f"constant value must be finite, got {value}")
    return SeparatelyHoelderObservable(
        arity=n,
        eta=1.0,
        holder_constants=(0.0,) * n,
        family=FAMILY_CONSTANT,
        kernel=lambda w: np.full(w.shape[0], value),
        constant_value=value,
        params={"value": value},
    )


def make_birkhoff(phi: PhiFunction, n: int) -> SeparatelyHoelderObservable:
    """``K = (1/n) sum_j phi(x_j)`` with ``L_j = Lambda / n``."""

    if n < 1:
        raise ArityError(f"Birkhoff average needs n ≥ 1, got {n}")
    if phi.constant is not None:
        return _constant_family(FAMILY_BIRKHOFF, phi, n, phi.constant)

    def kernel(windows: np.ndarray) -> np.ndarray:
        return np.sum(phi(windows), axis=1) / n

    return SeparatelyHoelderObservable(
        arity=n,
        eta=phi.eta,
        holder_constants=(phi.holder / n,) * n,
        family=FAMILY_BIRKHOFF,
        kernel=kernel,
        exact=phi.exact,
        phi_name=phi.name,
        params={"n": n},
    )


def make_pair_correlation(phi: PhiFunction, n: int) -> SeparatelyHoelderObservable:
    """``K = (1/(n-1)) sum_{j<n} phi(x_j) phi(x_{j+1})``.

    Each coordinate enters at most two products, hence ``2 M Lambda/(n-1)``
    in the interior and ``M Lambda/(n-1)`` at both ends.
    """

    if n < 2:
        raise ArityError(f"pair correlation needs n ≥ 2, got {n}")
    if phi.constant is not None:
        return _constant_family(FAMILY_PAIR, phi, n, phi.constant * phi.constant)
    edge = phi.sup_norm * phi.holder / (n - 1)
    constants = [2.0 * edge] * n
    constants[0] = constants[-1] = edge

    def kernel(windows: np.ndarray) -> np.ndarray:
        values = phi(windows)
        return np.sum(values[:, :-1] * values[:, 1:], axis=1) / (n - 1)

    return SeparatelyHoelderObservable(
        arity=n,
        eta=phi.eta,
        holder_constants=tuple(constants),
        family=FAMILY_PAIR,
        kernel=kernel,
        exact=phi.exact,
        phi_name=phi.name,
        params={"n": n},
    )


def make_weighted_sup(phi: PhiFunction, weights: Sequence[float]) -> SeparatelyHoelderObservable:
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or w.size == 0:
        raise ArityError("weighted sup needs at least one weight")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise ParameterError("weights must be finite and non-negative")
    w.setflags(write=False)

    def kernel(windows: np.ndarray) -> np.ndarray:
        return np.max(w * phi(windows), axis=1)

    return SeparatelyHoelderObservable(
        arity=int(w.size),
        eta=phi.eta,
        holder_constants=tuple(float(x) * phi.holder for x in w),
        family=FAMILY_WEIGHTED_SUP,
        kernel=kernel,
        exact=phi.exact,
        phi_name=phi.name,
        constant_value=0.0 if not np.any(w) else None,
        params={"weights": [float(x) for x in w]},
    )


def scaled(observable: SeparatelyHoelderObservable, factor: float) -> SeparatelyHoelderObservable:
    """``factor * K``: every ``L_j`` is multiplied by ``|factor|``."""

    factor = float(factor)
    if not math.isfinite(factor):
        raise ParameterError(f"scaling factor must be finite, got {factor}")
    base = observable.kernel
    root = observable.unscaled if observable.unscaled is not None else observable
    constant = None if observable.constant_value is None else factor * observable.constant_value
    return SeparatelyHoelderObservable(
        arity=observable.arity,
        eta=observable.eta,
        holder_constants=tuple(abs(factor) * value for value in observable.holder_constants),
        family=observable.family,
        kernel=lambda w: factor * base(w),
        exact=observable.exact,
        phi_name=observable.phi_name,
        constant_value=constant,
        params={**observable.params, "scale": factor},
        scale=observable.scale * factor,
        unscaled=root,
    )


def padded(observable: SeparatelyHoelderObservable, extra: int) -> SeparatelyHoelderObservable:
    """Extend ``K`` to ``n + extra`` variables it does not depend on."""

    if extra < 0:
        raise ArityError(f"padding must be ≥ 0, got {extra}")
    n = observable.arity
    base = observable.kernel
    return SeparatelyHoelderObservable(
        arity=n + extra,
        eta=observable.eta,
        holder_constants=observable.holder_constants + (0.0,) * extra,
        family=observable.family,
        kernel=lambda w: base(w[:, :n]),
        exact=observable.exact,
        phi_name=observable.phi_name,
        constant_value=observable.constant_value,
        params={**observable.params, "padding": extra},
    )


def _constant_family(family: str, phi: PhiFunction, n: int, value: float) -> SeparatelyHoelderObservable:
    return SeparatelyHoelderObservable(
        arity=n,
        eta=phi.eta,
        holder_constants=(0.0,) * n,
        family=family,
        kernel=lambda w: np.full(w.shape[0], value),
        phi_name=phi.name,
        constant_value=float(value),
        params={"n": n},
    )


def evaluate_on_window(observable: SeparatelyHoelderObservable, trajectory, offset: int) -> float:
    """``K(states[offset], ..., states[offset + n - 1])`` on a trajectory."""

    n = observable.arity
    if offset < 0 or offset + n > len(trajectory):
        raise BoundsError(
            f"window [{offset}, {offset + n}) does not fit a trajectory of length {len(trajectory)}"
        )
    window = observed_coordinate(trajectory.states[offset : offset + n], trajectory.system.state_dim)
    return float(observable.evaluate_batch(window[None, :])[0])
