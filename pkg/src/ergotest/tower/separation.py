"""Exact tower dynamics on symbolic points: atoms, separation times and contraction checks."""
from __future__ import annotations

import logging
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Optional, Tuple, Union

from ergotest.core.errors import ParameterError, PreconditionError, TruncationError

from .dyadic import apply_map, from_digits, is_dyadic
from .model import TowerModel

logger = logging.getLogger(__name__)

Atom = Tuple[int, int]


@dataclass(frozen=True)
class SymbolicPoint:
    """Tower point ``(x, level)`` with ``x`` an exact dyadic base point."""

    x: Fraction
    level: int = 0

    def __post_init__(self) -> None:
        if not is_dyadic(self.x):
            raise ParameterError(f"{self.x} is not a dyadic rational")
        if self.level < 0:
            raise ParameterError(f"level must be ≥ 0, got {self.level}")

    @classmethod
    def from_digits(cls, digits: str, level: int = 0) -> "SymbolicPoint":
        return cls(from_digits(digits), level)

    @property
    def digits(self) -> str:
        """Binary expansion of ``x`` without trailing zeros."""

        if self.x == 0:
            return "0"
        width = self.x.denominator.bit_length() - 1
        return format(self.x.numerator, f"0{width}b")


@dataclass(frozen=True)
class AtLeast:
    """Separation did not occur within ``bound`` iterates."""

    bound: int

    def __str__(self) -> str:
        return f">={self.bound}"


def atom(tower: TowerModel, point: SymbolicPoint) -> Atom:
    """``(level, branch index)`` of the partition element containing ``point``."""

    branch = tower.branch_at(point.x)
    if branch is None:
        raise TruncationError(f"{point.x} returns after q_max={tower.q_max}; its atom was truncated")
    if point.level >= branch.return_time:
        raise PreconditionError(
            f"level {point.level} is not below the return time {branch.return_time} of {point.x}"
        )
    return point.level, branch.index


def tower_step(tower: TowerModel, point: SymbolicPoint) -> SymbolicPoint:
    """``F(x, q) = (x, q + 1)`` below the return time, else ``(f^R(x), 0)``."""

    branch = tower.branch_at(point.x)
    if branch is None:
        raise TruncationError(f"{point.x} returns after q_max={tower.q_max}")
    if point.level + 1 < branch.return_time:
        return SymbolicPoint(point.x, point.level + 1)
    return SymbolicPoint(branch.first_return(point.x), 0)


def project(tower: TowerModel, point: SymbolicPoint) -> Fraction:
    """``π(x, q) = f^q(x)`` on the interval."""

    x = point.x
    for _ in range(point.level):
        x = apply_map(tower.map_branches, x)
    return x


def separation_time(
    z: SymbolicPoint, z_prime: SymbolicPoint, tower: TowerModel, horizon: int
) -> Union[int, AtLeast]:
    """First ``i`` with ``F^i z`` and ``F^i z'`` in different atoms, or ``AtLeast(horizon)``.

    The count starts at the shared atom of ``z`` and ``z'`` (``i = 0``), so a pair
    that splits on the first step has ``s = 1``. This is one more than the
    largest ``n`` with ``F^i z`` and ``F^i z'`` sharing an atom for every ``i <= n``.
    """

    if horizon < 1:
        raise ParameterError(f"horizon must be ≥ 1, got {horizon}")
    if atom(tower, z) != atom(tower, z_prime):
        raise PreconditionError("separation time is only defined for points of the same atom")
    for i in range(1, horizon + 1):
        z, z_prime = tower_step(tower, z), tower_step(tower, z_prime)
        if atom(tower, z) != atom(tower, z_prime):
            return i
    return AtLeast(horizon)


@dataclass(frozen=True)
class ContractionCheck:
    pairs: int
    violations: int
    worst_ratio: float
    skipped: int

    @property
    def ok(self) -> bool:
        return self.violations == 0

    def to_record(self) -> Dict[str, object]:
        return {
            "pairs": self.pairs,
            "violations": self.violations,
            "worst_ratio": self.worst_ratio,
            "skipped": self.skipped,
        }


def _random_base_point(rng: random.Random, tower: TowerModel, digits: int) -> Fraction:
    lo, hi = tower.base
    scale = 2**digits
    return lo + Fraction(rng.randrange(int((hi - lo) * scale)), scale)


def _nearby(rng: random.Random, x: Fraction, digits: int) -> Fraction:
    keep = rng.randrange(1, digits)
    scale = 2**digits
    numerator = int(x * scale)
    low_bits = digits - keep
    numerator = (numerator >> low_bits << low_bits) | rng.randrange(2**low_bits)
    return Fraction(numerator, scale)


def _separation_or_zero(tower: TowerModel, y: SymbolicPoint, y_prime: SymbolicPoint, horizon: int) -> int:
    if atom(tower, y) != atom(tower, y_prime):
        return 0
    s = separation_time(y, y_prime, tower, horizon)
    return s.bound if isinstance(s, AtLeast) else s


def backward_contraction_check(
    tower: TowerModel,
    pairs: int = 1000,
    *,
    contraction: float = 0.5,
    constant: float = 1.0,
    digits: int = 48,
    horizon: int = 64,
    seed: int = 0,
) -> ContractionCheck:
    """Count pairs violating ``d(π y, π y') ≤ C α^min(q, s(y, y'))``.

    Each sample draws base points ``ỹ, ỹ'`` sharing a random digit prefix, a
    level count ``q ≤ s(ỹ, ỹ')`` and sets ``y = F^q ỹ``, ``y' = F^q ỹ'``.
    """

    if pairs < 1:
        raise ParameterError(f"pairs must be ≥ 1, got {pairs}")
    if not 0.0 < contraction < 1.0:
        raise ParameterError(f"contraction must lie in (0, 1), got {contraction}")
    rng = random.Random(seed)
    violations = skipped = checked = 0
    worst = 0.0
    while checked < pairs:
        x = _random_base_point(rng, tower, digits)
        x_prime = _nearby(rng, x, digits)
        if not tower.base[0] <= x_prime < tower.base[1]:
            skipped += 1
            continue
        start, start_prime = SymbolicPoint(x), SymbolicPoint(x_prime)
        try:
            s_start = _separation_or_zero(tower, start, start_prime, horizon)
            if s_start == 0:
                skipped += 1
                continue
            q = rng.randint(0, s_start)
            y, y_prime = start, start_prime
            for _ in range(q):
                y, y_prime = tower_step(tower, y), tower_step(tower, y_prime)
            s_end = _separation_or_zero(tower, y, y_prime, horizon)
        except TruncationError:
            skipped += 1
            continue
        distance = abs(float(project(tower, y) - project(tower, y_prime)))
        bound = constant * contraction ** min(q, s_end)
        ratio = distance / bound
        worst = max(worst, ratio)
        if ratio > 1.0:
            violations += 1
        checked += 1
    if skipped:
        logger.debug("contraction check skipped %d draws (truncated or separated at once)", skipped)
    return ContractionCheck(pairs=checked, violations=violations, worst_ratio=worst, skipped=skipped)


@dataclass(frozen=True)
class TowerAxioms:
    disjoint_cover: bool
    max_branches_per_return_time: int
    levels_nonincreasing: bool
    separation_after_return: bool

    @property
    def ok(self) -> bool:
        return self.disjoint_cover and self.levels_nonincreasing and self.separation_after_return

    def to_record(self) -> Dict[str, object]:
        return {
            "disjoint_cover": self.disjoint_cover,
            "max_branches_per_return_time": self.max_branches_per_return_time,
            "levels_nonincreasing": self.levels_nonincreasing,
            "separation_after_return": self.separation_after_return,
            "ok": self.ok,
        }


def check_tower_axioms(tower: TowerModel, *, horizon: Optional[int] = None) -> TowerAxioms:
    """Structural checks: branches and tail tile the base, level measures decrease, ``s ≥ R_i``."""

    pieces = sorted([(b.left, b.right) for b in tower.branches] + list(tower.tail))
    cover = bool(pieces) and pieces[0][0] == tower.base[0] and pieces[-1][1] == tower.base[1]
    cover = cover and all(left[1] == right[0] for left, right in zip(pieces, pieces[1:]))

    levels = tower.level_measures()
    nonincreasing = all(a >= b for a, b in zip(levels, levels[1:]))

    limit = horizon or 2 * tower.q_max + 2
    separated = True
    for branch in tower.branches:
        quarter = branch.length / 4
        z, z_prime = SymbolicPoint(branch.left + quarter), SymbolicPoint(branch.right - quarter)
        try:
            s = separation_time(z, z_prime, tower, limit)
        except TruncationError:
            continue
        if not isinstance(s, AtLeast) and s < branch.return_time:
            separated = False
            break
    counts = tower.branch_counts()
    return TowerAxioms(
        disjoint_cover=cover,
        max_branches_per_return_time=max(counts.values(), default=0),
        levels_nonincreasing=nonincreasing,
        separation_after_return=separated,
    )
