from __future__ import annotations

import csv
import math
import random
from fractions import Fraction

import numpy as np
import numpy.testing as npt
import pytest

from ergotest.core.errors import CapabilityError, DomainError, ParameterError, PreconditionError, TruncationError
from ergotest.maps import make_system
from ergotest.tower import (
    AtLeast,
    SymbolicPoint,
    atom,
    backward_contraction_check,
    build_first_return_tower,
    check_tower_axioms,
    format_dyadic,
    format_interval,
    kac_check,
    level_masses,
    parse_interval,
    project,
    project_to_interval,
    return_tail_exact,
    separation_time,
    tail_slope,
    tower_step,
    tower_summary,
    tower_ulam,
    write_branch_csv,
)

HALF = (Fraction(0), Fraction(1, 2))


@pytest.fixture(scope="module")
def doubling_tower():
    return build_first_return_tower(make_system("doubling"), HALF, 30)


def test_dyadic_parsing_and_formatting() -> None:
    assert parse_interval("0/1..1/2") == HALF
    assert parse_interval("1/2^3..1/2") == (Fraction(1, 8), Fraction(1, 2))
    assert format_dyadic(Fraction(3, 8)) == "3/2^3"
    assert format_interval(HALF) == "0/2^0..1/2^1"
    with pytest.raises(CapabilityError):
        parse_interval("0..1/3")
    with pytest.raises(DomainError):
        parse_interval("1/2..1/4")
    with pytest.raises(ParameterError):
        parse_interval("0..half")


def test_doubling_return_times_are_geometric(doubling_tower) -> None:
    distribution = doubling_tower.return_time_distribution()
    assert sorted(distribution) == list(range(1, 31))
    for n, mass in distribution.items():
        assert mass == Fraction(1, 2**n)
    assert doubling_tower.branch_counts() == {n: 1 for n in range(1, 31)}
    assert return_tail_exact(doubling_tower, 5) == Fraction(1, 16)


def test_doubling_kac_and_tail_slope(doubling_tower) -> None:
    assert abs(kac_check(doubling_tower) - 1.0) <= 1e-6
    assert abs(tail_slope(doubling_tower) + math.log(2.0)) <= 1e-9
    record = tower_summary(doubling_tower)
    assert record["branch_count"] == 30
    assert record["tail_remainder"] == 2.0**-30


def test_return_tail_beyond_truncation(doubling_tower) -> None:
    with pytest.raises(TruncationError):
        return_tail_exact(doubling_tower, 31)


def test_kac_refuses_large_truncated_mass() -> None:
    tower = build_first_return_tower(make_system("doubling"), HALF, 5)
    with pytest.raises(TruncationError):
        kac_check(tower)
    assert tower_summary(tower)["kac_product"] is None


def test_tent_tower_satisfies_kac() -> None:
    tower = build_first_return_tower(make_system("tent"), parse_interval("1/4..3/4"), 30)
    assert abs(kac_check(tower) - 1.0) <= 1e-6
    assert check_tower_axioms(tower).ok


def test_tower_needs_linear_dyadic_map() -> None:
    with pytest.raises(CapabilityError):
        build_first_return_tower(make_system("logistic"), HALF, 10)


def test_tower_axioms(doubling_tower) -> None:
    axioms = check_tower_axioms(doubling_tower)
    assert axioms.ok
    assert axioms.max_branches_per_return_time == 1
    assert axioms.to_record()["disjoint_cover"] is True


def test_symbolic_points_and_atoms(doubling_tower) -> None:
    point = SymbolicPoint.from_digits("001")
    assert point.x == Fraction(1, 8)
    assert point.digits == "001"
    assert atom(doubling_tower, point) == (0, 0)
    with pytest.raises(PreconditionError):
        atom(doubling_tower, SymbolicPoint(Fraction(1, 8), level=1))


def test_tower_step_returns_to_base(doubling_tower) -> None:
    point = SymbolicPoint(Fraction(5, 16))
    branch = doubling_tower.branch_at(point.x)
    assert branch.return_time == 2
    up = tower_step(doubling_tower, point)
    assert up == SymbolicPoint(Fraction(5, 16), 1)
    assert project(doubling_tower, up) == Fraction(5, 8)
    assert tower_step(doubling_tower, up) == SymbolicPoint(Fraction(1, 4), 0)


def test_separation_time_within_branch(doubling_tower) -> None:
    z = SymbolicPoint(Fraction(5, 16))
    z_prime = SymbolicPoint(Fraction(5, 16) + Fraction(1, 2**20))
    s = separation_time(z, z_prime, doubling_tower, 64)
    assert isinstance(s, int) and s >= 2
    assert separation_time(z, z, doubling_tower, 8) == AtLeast(8)
    with pytest.raises(PreconditionError):
        separation_time(z, SymbolicPoint(Fraction(1, 8)), doubling_tower, 8)


def test_backward_contraction_has_no_violations(doubling_tower) -> None:
    check = backward_contraction_check(doubling_tower, 200, seed=0)
    assert check.pairs == 200
    assert check.violations == 0
    assert check.worst_ratio <= 1.0


@pytest.mark.slow
def test_backward_contraction_acceptance(doubling_tower) -> None:
    assert backward_contraction_check(doubling_tower, 1000, seed=1).violations == 0


def test_tower_ulam_projects_to_lebesgue() -> None:
    tower = build_first_return_tower(make_system("doubling"), HALF, 24)
    op = tower_ulam(tower, 2)
    npt.assert_allclose(op.row_sums(), np.ones(op.bins), rtol=0, atol=1e-12)
    masses = level_masses(op)
    assert masses.sum() == pytest.approx(1.0)
    assert np.all(np.diff(masses) <= 1e-12)
    projected = project_to_interval(tower, op, 4)
    npt.assert_allclose(projected, np.full(4, 0.25), atol=1e-3)


def test_tower_ulam_refuses_short_towers() -> None:
    with pytest.raises(TruncationError):
        tower_ulam(build_first_return_tower(make_system("doubling"), HALF, 10), 2)


def test_branch_csv(tmp_path, doubling_tower) -> None:
    path = write_branch_csv(doubling_tower, tmp_path / "branches.csv")
    with path.open(encoding="utf-8") as handle:
        rows = list(csv.reader(handle))
    assert rows[0] == ["branch_index", "left", "right", "return_time"]
    assert rows[1] == ["0", "0/2^0", "1/2^2", "1"]
    assert len(rows) == 31


def test_separation_time_of_neighbouring_branches(doubling_tower) -> None:
    z = SymbolicPoint.from_digits("000")
    z_prime = SymbolicPoint.from_digits("001")
    assert atom(doubling_tower, z) == atom(doubling_tower, z_prime)
    assert separation_time(z, z_prime, doubling_tower, 64) == 1


def test_separation_time_is_horizon_monotone(doubling_tower) -> None:
    rng = random.Random(0)
    checked = 0
    while checked < 100:
        x = Fraction(rng.randrange(2**19), 2**20)
        x_prime = x + Fraction(1, 2 ** rng.randrange(4, 24))
        if x_prime >= Fraction(1, 2):
            continue
        z, z_prime = SymbolicPoint(x), SymbolicPoint(x_prime)
        if atom(doubling_tower, z) != atom(doubling_tower, z_prime):
            continue
        short = separation_time(z, z_prime, doubling_tower, 8)
        long = separation_time(z, z_prime, doubling_tower, 16)
        expected = long if isinstance(long, int) and long <= 8 else AtLeast(8)
        assert short == expected
        checked += 1


def test_tower_ulam_level_masses_follow_return_tail(doubling_tower) -> None:
    op = tower_ulam(doubling_tower, 1)
    masses = level_masses(op)
    npt.assert_allclose(masses[:6], [2.0 ** -(q + 1) for q in range(6)], rtol=0, atol=1e-6)
    assert abs(op.lambda2) < 1.0


def test_whole_interval_base_returns_immediately() -> None:
    tower = build_first_return_tower(make_system("doubling"), (Fraction(0), Fraction(1)), 30)
    assert tower.return_time_distribution() == {1: Fraction(1)}
    assert kac_check(tower) == pytest.approx(1.0)
    assert check_tower_axioms(tower).ok
