"""Exact dyadic-rational helpers for piecewise-linear Markov maps."""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence, Tuple

from ergotest.core.errors import CapabilityError, DomainError, ParameterError
from ergotest.maps.catalog import LinearBranch

Interval = Tuple[Fraction, Fraction]


def is_dyadic(value: Fraction) -> bool:
    denominator = value.denominator
    return denominator & (denominator - 1) == 0


def format_dyadic(value: Fraction) -> str:
    """Render ``p/2^k`` with ``k`` the exponent of the reduced denominator."""

    if not is_dyadic(value):
        raise CapabilityError(f"{value} is not a dyadic rational")
    return f"{value.numerator}/2^{value.denominator.bit_length() - 1}"


def parse_fraction(text: object) -> Fraction:
    if isinstance(text, Fraction):
        return text
    raw = str(text).strip()
    try:
        if "^" in raw:
            numerator, _, power = raw.partition("/2^")
            return Fraction(int(numerator), 2 ** int(power))
        return Fraction(raw)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise ParameterError(f"'{raw}' is not a fraction: {exc}") from exc


def parse_interval(text: object) -> Interval:
    """Parse ``"a..b"`` (or a two-item sequence) into exact dyadic endpoints."""

    if isinstance(text, (list, tuple)):
        if len(text) != 2:
            raise CapabilityError(f"an interval needs two endpoints, got {text!r}")
        left, right = (parse_fraction(item) for item in text)
    else:
        raw_left, sep, raw_right = str(text).partition("..")
        if not sep:
            raise CapabilityError(f"interval '{text}' must look like 'a..b'")
        left, right = parse_fraction(raw_left), parse_fraction(raw_right)
    for endpoint in (left, right):
        if not is_dyadic(endpoint):
            raise CapabilityError(f"endpoint {endpoint} of '{text}' is not a dyadic rational")
    if not 0 <= left < right <= 1:
        raise DomainError(f"interval '{text}' must satisfy 0 ≤ a < b ≤ 1")
    return left, right


def format_interval(interval: Interval) -> str:
    return f"{format_dyadic(interval[0])}..{format_dyadic(interval[1])}"


def branch_of(branches: Sequence[LinearBranch], x: Fraction) -> LinearBranch:
    for branch in branches:
        if branch.lo <= x < branch.hi:
            return branch
    raise DomainError(f"{x} lies outside [0, 1)")


def apply_map(branches: Sequence[LinearBranch], x: Fraction) -> Fraction:
    """One exact step; the image 1 is identified with 0."""

    image = branch_of(branches, x).apply(x)
    return Fraction(0) if image == 1 else image


def map_interval(branches: Sequence[LinearBranch], interval: Interval) -> Interval:
    """Image of an interval contained in a single branch, as ``(min, max)``."""

    left, right = interval
    branch = branch_of(branches, (left + right) / 2)
    if not branch.contains(left, right):
        raise DomainError(f"[{left}, {right}) straddles a branch point")
    a, b = branch.apply(left), branch.apply(right)
    return (a, b) if a <= b else (b, a)


def iterate_interval(branches: Sequence[LinearBranch], interval: Interval, steps: int) -> Interval:
    for _ in range(steps):
        interval = map_interval(branches, interval)
    return interval


def overlap(first: Interval, second: Interval) -> Fraction:
    return max(Fraction(0), min(first[1], second[1]) - max(first[0], second[0]))


def from_digits(digits: str) -> Fraction:
    """``"001"`` -> 1/8: a finite binary expansion ``0.d1 d2 ...``."""

    cleaned = digits.strip()
    if cleaned.startswith("0."):
        cleaned = cleaned[2:]
    if cleaned and set(cleaned) - {"0", "1"}:
        raise DomainError(f"'{digits}' is not a binary digit string")
    if not cleaned:
        return Fraction(0)
    return Fraction(int(cleaned, 2), 2 ** len(cleaned))
