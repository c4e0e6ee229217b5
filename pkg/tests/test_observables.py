from __future__ import annotations

import math

import numpy as np
import numpy.testing as npt
import pytest

from ergotest.core.errors import ArityError, BoundsError, ParameterError
from ergotest.maps import make_system, orbit
from ergotest.observables import (
    black_box,
    constant_phi,
    estimate_holder_constant,
    estimate_phi,
    evaluate_on_window,
    get_phi,
    make_birkhoff,
    make_constant,
    make_pair_correlation,
    make_weighted_sup,
    padded,
    scaled,
)


def test_birkhoff_constants() -> None:
    K = make_birkhoff(get_phi("cos2pi"), 10)
    assert K.arity == 10
    assert K.holder_constant(1) == pytest.approx(2 * math.pi / 10)
    assert K.holder_constant(11) == 0.0
    assert K.sum_l2 == pytest.approx(4 * math.pi**2 / 10, rel=1e-12)
    assert K.label == "birkhoff-cos2pi"


def test_birkhoff_evaluation() -> None:
    K = make_birkhoff(get_phi("identity"), 4)
    assert K(0.0, 0.25, 0.5, 0.25) == pytest.approx(0.25)
    with pytest.raises(ArityError):
        K(0.1, 0.2)


def test_pair_correlation_constants() -> None:
    K = make_pair_correlation(get_phi("cos2pi"), 5)
    edge = 2 * math.pi / 4
    npt.assert_allclose(K.holder_constants, [edge, 2 * edge, 2 * edge, 2 * edge, edge])
    with pytest.raises(ArityError):
        make_pair_correlation(get_phi("cos2pi"), 1)


def test_weighted_sup_zero_weights_is_constant() -> None:
    K = make_weighted_sup(get_phi("cos2pi"), [0.0, 0.0, 0.0])
    assert K.is_constant
    assert K.sum_l2 == 0.0
    with pytest.raises(ParameterError):
        make_weighted_sup(get_phi("cos2pi"), [1.0, -1.0])


def test_constant_observable() -> None:
    K = make_constant(3.5, 4)
    assert K.sum_l2 == 0.0
    npt.assert_array_equal(K.evaluate_batch(np.random.default_rng(0).random((7, 4))), np.full(7, 3.5))


def test_constant_phi_collapses_families() -> None:
    K = make_birkhoff(constant_phi(2.0), 6)
    assert K.is_constant and K.sum_l2 == 0.0


def test_scaling_multiplies_constants() -> None:
    K = make_birkhoff(get_phi("cos2pi"), 8)
    windows = np.random.default_rng(1).random((5, 8))
    for factor in (4.0, -0.5):
        S = scaled(K, factor)
        assert S.unscaled is K and S.scale == factor
        assert S.sum_l2 == factor**2 * K.sum_l2
        npt.assert_array_equal(S.evaluate_batch(windows), factor * K.evaluate_batch(windows))


def test_padding_adds_zero_constants() -> None:
    K = make_pair_correlation(get_phi("cos2pi"), 3)
    P = padded(K, 2)
    assert P.arity == 5
    assert P.holder_constant(4) == P.holder_constant(5) == 0.0
    assert P.sum_l2 == K.sum_l2
    windows = np.random.default_rng(2).random((6, 5))
    npt.assert_array_equal(P.evaluate_batch(windows), K.evaluate_batch(windows[:, :3]))


def test_evaluate_on_window_bounds() -> None:
    doubling = make_system("doubling")
    trajectory = orbit(doubling, 0.1, 0, 5)
    K = make_birkhoff(get_phi("identity"), 3)
    assert evaluate_on_window(K, trajectory, 0) == pytest.approx((0.1 + 0.2 + 0.4) / 3)
    with pytest.raises(BoundsError):
        evaluate_on_window(K, trajectory, 3)


def test_holder_estimate_is_lower_bound_of_analytic_constant() -> None:
    K = make_birkhoff(get_phi("cos2pi"), 10)
    bound = 2 * math.pi / 10
    estimate = estimate_holder_constant(K, 1, 1.0, pairs=1000, seed=7)
    assert 0.9 * bound <= estimate <= bound * (1 + 1e-6)


def test_holder_estimate_nondecreasing_in_pairs() -> None:
    K = make_birkhoff(get_phi("sqrt"), 4)
    few = estimate_holder_constant(K, 2, 0.5, pairs=1000, seed=11)
    many = estimate_holder_constant(K, 2, 0.5, pairs=3000, seed=11)
    assert many >= few


def test_holder_estimate_rejects_bad_requests() -> None:
    K = make_birkhoff(get_phi("cos2pi"), 3)
    with pytest.raises(ArityError):
        estimate_holder_constant(K, 0, 1.0)
    with pytest.raises(ParameterError):
        estimate_holder_constant(K, 1, 1.0, pairs=10)
    with pytest.raises(ParameterError):
        estimate_holder_constant(K, 1, 1.5)


def test_estimated_phi_is_flagged_inexact() -> None:
    phi = estimate_phi("square", lambda x: x * x, 1.0)
    assert not phi.exact
    assert 1.0 < phi.holder <= 2.0 * (1 + 1e-6)
    assert phi.sup_norm == pytest.approx(1.0)
    assert not make_birkhoff(phi, 5).exact


def test_black_box_estimates_every_coordinate() -> None:
    K = black_box(lambda w: np.max(w, axis=1), 3, 1.0)
    assert K.family == "black_box"
    assert not K.exact
    assert all(0.9 <= value <= 1.0 + 1e-9 for value in K.holder_constants)


def test_unknown_phi() -> None:
    with pytest.raises(ParameterError) as exc:
        get_phi("tanh")
    assert "abs_dist_half" in str(exc.value)


@pytest.mark.parametrize(
    "K",
    [
        make_birkhoff(get_phi("cos2pi"), 10),
        make_birkhoff(get_phi("sqrt"), 5),
        make_pair_correlation(get_phi("cos2pi"), 6),
        make_pair_correlation(get_phi("abs_dist_half"), 4),
        make_weighted_sup(get_phi("cos2pi"), [2.0, 1.0, 0.5]),
        scaled(make_birkhoff(get_phi("abs_dist_half"), 3), -4.0),
    ],
    ids=lambda K: f"{K.label}-{K.arity}",
)
def test_constants_bound_single_coordinate_changes(K) -> None:
    rng = np.random.default_rng(17)
    windows = rng.random((500, K.arity))
    for j in range(1, K.arity + 1):
        moved = windows.copy()
        moved[:, j - 1] = rng.random(500)
        change = np.abs(K.evaluate_batch(moved) - K.evaluate_batch(windows))
        distance = np.abs(moved[:, j - 1] - windows[:, j - 1])
        assert np.all(change <= K.holder_constant(j) * distance**K.eta * (1 + 1e-9) + 1e-12)


def test_weighted_sup_perturbation_matches_weight() -> None:
    K = make_weighted_sup(get_phi("identity"), [2.0, 1.0])
    delta = 1e-3
    assert abs(K(0.6 + delta, 0.1) - K(0.6, 0.1)) <= 2.0 * delta * (1 + 1e-9)


def test_zero_constant_coordinates_are_ignored() -> None:
    rng = np.random.default_rng(23)
    for K, idle in (
        (padded(make_birkhoff(get_phi("cos2pi"), 3), 2), (4, 5)),
        (make_weighted_sup(get_phi("cos2pi"), [1.0, 0.0, 1.0]), (2,)),
    ):
        windows = rng.random((200, K.arity))
        for j in idle:
            assert K.holder_constant(j) == 0.0
            moved = windows.copy()
            moved[:, j - 1] = rng.random(200)
            npt.assert_array_equal(K.evaluate_batch(moved), K.evaluate_batch(windows))
