"""First-return Young towers of piecewise-linear dyadic Markov maps, built exactly."""
from __future__ import annotations

import csv
import logging
import math
from collections import Counter, deque
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Deque, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ergotest.core.errors import CapabilityError, ParameterError, PreconditionError, TruncationError
from ergotest.maps.catalog import DynamicalSystem, LinearBranch

from .dyadic import Interval, format_dyadic, format_interval, is_dyadic

logger = logging.getLogger(__name__)

MAX_BRANCHES = 1_000_000
KAC_TAIL_LIMIT = 1e-6


@dataclass(frozen=True)
class TowerBranch:
    """``Λ_i = [left, right)`` with return time ``R_i`` and ``f^R_i(x) = slope * x + intercept``."""

    index: int
    left: Fraction
    right: Fraction
    return_time: int
    slope: int
    intercept: Fraction

    @property
    def length(self) -> Fraction:
        return self.right - self.left

    def contains(self, x: Fraction) -> bool:
        return self.left <= x < self.right

    def first_return(self, x: Fraction) -> Fraction:
        return self.slope * x + self.intercept


@dataclass(frozen=True)
class TowerModel:
    system: DynamicalSystem
    base: Interval
    branches: Tuple[TowerBranch, ...]
    q_max: int
    tail: Tuple[Interval, ...] = field(default=(), repr=False)

    @property
    def base_measure(self) -> Fraction:
        return self.base[1] - self.base[0]

    @property
    def map_branches(self) -> Sequence[LinearBranch]:
        return self.system.linear_branches()

    @property
    def tail_mass(self) -> Fraction:
        """Lebesgue mass of ``{R > q_max}`` inside the base."""

        return sum((b - a for a, b in self.tail), Fraction(0))

    @property
    def tail_remainder(self) -> Fraction:
        """Conditional truncated mass ``m(R > q_max | Λ)``."""

        return self.tail_mass / self.base_measure

    def level_measure(self, q: int) -> Fraction:
        """``m(Δ_q) = m({R > q} ∩ Λ)`` for ``0 ≤ q < q_max``."""

        if not 0 <= q < self.q_max:
            raise TruncationError(f"level {q} outside the truncated tower 0..{self.q_max - 1}")
        return sum((b.length for b in self.branches if b.return_time > q), Fraction(0)) + self.tail_mass

    def level_measures(self) -> List[Fraction]:
        return [self.level_measure(q) for q in range(self.q_max)]

    def branch_at(self, x: Fraction) -> Optional[TowerBranch]:
        """Branch containing ``x``; None for points of the truncated tail."""

        if not self.base[0] <= x < self.base[1]:
            raise PreconditionError(f"{x} is not a base point of {format_interval(self.base)}")
        for branch in self.branches:
            if branch.contains(x):
                return branch
        return None

    def return_time_distribution(self) -> Dict[int, Fraction]:
        """``m(R = n | Λ)`` for every recorded return time."""

        masses: Dict[int, Fraction] = {}
        for branch in self.branches:
            masses[branch.return_time] = masses.get(branch.return_time, Fraction(0)) + branch.length
        return {n: mass / self.base_measure for n, mass in sorted(masses.items())}

    def branch_counts(self) -> Dict[int, int]:
        return dict(sorted(Counter(b.return_time for b in self.branches).items()))


def _cuts(points: Sequence[Fraction], image: Interval) -> List[Fraction]:
    return sorted({p for p in points if image[0] < p < image[1]})


def _pull_back(slope: int, intercept: Fraction, y: Fraction) -> Fraction:
    return (y - intercept) / slope


def build_first_return_tower(system: DynamicalSystem, base: Interval, q_max: int) -> TowerModel:
    """Enumerate first-return cylinders of ``base`` up to return time ``q_max``.

    Each queued piece carries the affine composite ``f^d`` on it; a piece is
    cut wherever its next image crosses a branch point or an endpoint of the
    base, so every recorded branch has an exact affine return map.
    """

    if q_max < 1:
        raise ParameterError(f"q_max must be ≥ 1, got {q_max}")
    lo, hi = Fraction(base[0]), Fraction(base[1])
    if not (is_dyadic(lo) and is_dyadic(hi)):
        raise CapabilityError(f"base [{lo}, {hi}) must have dyadic endpoints")
    if not 0 <= lo < hi <= 1:
        raise ParameterError(f"base must satisfy 0 ≤ a < b ≤ 1, got [{lo}, {hi})")
    map_branches = system.linear_branches()
    branch_points = [b.lo for b in map_branches] + [map_branches[-1].hi]
    cut_points = branch_points + [lo, hi]

    # (left, right, depth, slope, intercept) with f^depth = slope * x + intercept on [left, right).
    queue: Deque[Tuple[Fraction, Fraction, int, int, Fraction]] = deque()
    starts = [lo] + _cuts(branch_points, (lo, hi)) + [hi]
    for a, b in zip(starts, starts[1:]):
        queue.append((a, b, 0, 1, Fraction(0)))

    found: List[Tuple[Fraction, Fraction, int, int, Fraction]] = []
    tail: List[Interval] = []
    while queue:
        a, b, depth, slope, intercept = queue.popleft()
        image_lo, image_hi = sorted((slope * a + intercept, slope * b + intercept))
        step = next(br for br in map_branches if br.contains(image_lo, image_hi))
        slope, intercept = step.slope * slope, step.slope * intercept + step.intercept
        depth += 1
        image = tuple(sorted((slope * a + intercept, slope * b + intercept)))
        xs = sorted({a, b, *(_pull_back(slope, intercept, y) for y in _cuts(cut_points, image))})
        for left, right in zip(xs, xs[1:]):
            piece_lo, piece_hi = sorted((slope * left + intercept, slope * right + intercept))
            if lo <= piece_lo and piece_hi <= hi:
                found.append((left, right, depth, slope, intercept))
                if len(found) > MAX_BRANCHES:
                    raise CapabilityError(f"more than {MAX_BRANCHES} return branches; lower q_max")
            elif depth >= q_max:
                tail.append((left, right))
            else:
                queue.append((left, right, depth, slope, intercept))

    found.sort(key=lambda item: item[0])
    branches = tuple(
        TowerBranch(index, left, right, depth, slope, intercept)
        for index, (left, right, depth, slope, intercept) in enumerate(found)
    )
    tower = TowerModel(system=system, base=(lo, hi), branches=branches, q_max=q_max, tail=tuple(sorted(tail)))
    logger.debug(
        "tower over %s: %d branches, tail remainder %.3e", format_interval((lo, hi)), len(branches), float(tower.tail_remainder)
    )
    return tower


def return_tail_exact(tower: TowerModel, n: int) -> Fraction:
    if n < 1:
        raise ParameterError(f"n must be ≥ 1, got {n}")
    if n > tower.q_max:
        raise TruncationError(f"return tail known exactly only for 1 ≤ n ≤ {tower.q_max}, got n={n}")
    mass = sum((b.length for b in tower.branches if b.return_time >= n), Fraction(0)) + tower.tail_mass
    return mass / tower.base_measure


def return_tail(tower: TowerModel, n: int) -> float:
    """``m(R ≥ n | Λ)`` from the exact branch table."""

    return float(return_tail_exact(tower, n))


def tail_slope(tower: TowerModel) -> float:
    """Least-squares slope of ``log m(R ≥ n | Λ)`` over ``n = 2..q_max`` (the empirical ``log θ``)."""

    if tower.q_max < 3:
        raise PreconditionError("fitting the tail needs q_max ≥ 3")
    ns = np.arange(2, tower.q_max + 1)
    tails = [return_tail_exact(tower, int(n)) for n in ns]
    if any(t == 0 for t in tails):
        raise PreconditionError("return tail vanishes before q_max; nothing to fit")
    logs = np.array([math.log(t.numerator) - math.log(t.denominator) for t in tails])
    slope, _ = np.polyfit(ns.astype(np.float64), logs, 1)
    return float(slope)


def kac_check(tower: TowerModel) -> float:
    """``E[R | Λ] m(Λ)``, counting the truncated tail at its lower bound ``q_max + 1``."""

    remainder = tower.tail_remainder
    if remainder >= KAC_TAIL_LIMIT:
        raise TruncationError(
            f"truncated mass m(R > q_max | Λ) = {float(remainder):.3e} exceeds {KAC_TAIL_LIMIT:g}; raise q_max"
        )
    total = sum((b.return_time * b.length for b in tower.branches), Fraction(0))
    total += (tower.q_max + 1) * tower.tail_mass
    return float(total)


def tower_summary(tower: TowerModel) -> Dict[str, object]:
    try:
        kac: Optional[float] = kac_check(tower)
    except TruncationError:
        kac = None
    try:
        slope: Optional[float] = tail_slope(tower)
    except PreconditionError:
        slope = None
    return {
        "base": format_interval(tower.base),
        "branch_count": len(tower.branches),
        "q_max": tower.q_max,
        "tail_remainder": float(tower.tail_remainder),
        "kac_product": kac,
        "fitted_log_theta": slope,
    }


def write_branch_csv(tower: TowerModel, path: Path) -> Path:
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["branch_index", "left", "right", "return_time"])
        for branch in tower.branches:
            writer.writerow([branch.index, format_dyadic(branch.left), format_dyadic(branch.right), branch.return_time])
    return Path(path)
