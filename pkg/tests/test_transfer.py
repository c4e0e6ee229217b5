from __future__ import annotations

import csv

import numpy as np
import numpy.testing as npt
import pytest

from ergotest.core.errors import CapabilityError, ParameterError, PreconditionError
from ergotest.maps import make_system
from ergotest.observables import get_phi
from ergotest.transfer import (
    bin_averages,
    build_ulam,
    decay_envelope,
    operator_correlation,
    spectral_gap,
    stationary_l1_error,
    summary,
    write_matrix_csv,
)


def test_doubling_two_bins_matrix() -> None:
    op = build_ulam(make_system("doubling"), 2)
    npt.assert_allclose(op.dense(), [[0.5, 0.5], [0.5, 0.5]], rtol=0, atol=1e-15)


def test_doubling_four_bins_exact_algebra() -> None:
    op = build_ulam(make_system("doubling"), 4)
    expected = np.array(
        [
            [0.5, 0.5, 0.0, 0.0],
            [0.0, 0.0, 0.5, 0.5],
            [0.5, 0.5, 0.0, 0.0],
            [0.0, 0.0, 0.5, 0.5],
        ]
    )
    npt.assert_allclose(op.dense(), expected, rtol=0, atol=1e-15)
    assert abs(op.lambda2) < 1e-12
    npt.assert_allclose(op.stationary, np.full(4, 0.25), rtol=0, atol=1e-12)
    assert summary(op)["gap"] == pytest.approx(1.0, abs=1e-12)


def test_tent_matrix_rows_are_stochastic() -> None:
    op = build_ulam(make_system("tent"), 8)
    npt.assert_allclose(op.row_sums(), np.ones(8), rtol=0, atol=1e-14)
    npt.assert_allclose(op.stationary, np.full(8, 0.125), rtol=0, atol=1e-12)


def test_single_bin_operator() -> None:
    op = build_ulam(make_system("logistic"), 1)
    npt.assert_allclose(op.dense(), [[1.0]])
    assert spectral_gap(op).lambda2 == 0.0


def test_logistic_density_matches_arcsine_law() -> None:
    op = build_ulam(make_system("logistic"), 2000)
    # The arcsine singularities at 0 and 1 limit the L1 error to order N^-1/2.
    assert stationary_l1_error(op) <= 0.035
    assert 0.0 < op.lambda2 < 0.9


@pytest.mark.slow
def test_logistic_density_fine_grid() -> None:
    assert stationary_l1_error(build_ulam(make_system("logistic"), 8000)) <= 0.02


def test_logistic_density_improves_under_refinement() -> None:
    logistic = make_system("logistic")
    errors = [stationary_l1_error(build_ulam(logistic, N)) for N in (250, 500, 1000, 2000)]
    assert all(coarse > fine for coarse, fine in zip(errors, errors[1:]))


def test_doubling_density_is_uniform_at_every_refinement() -> None:
    doubling = make_system("doubling")
    for N in (8, 16, 32):
        npt.assert_allclose(build_ulam(doubling, N).stationary, np.full(N, 1.0 / N), rtol=0, atol=1e-12)


def test_powers_stay_stochastic() -> None:
    op = build_ulam(make_system("logistic"), 200)
    power = np.linalg.matrix_power(op.dense(), 50)
    npt.assert_allclose(power.sum(axis=1), np.ones(200), rtol=0, atol=1e-12)
    assert power.min() >= 0.0


def test_logistic_correlations_decay_geometrically() -> None:
    op = build_ulam(make_system("logistic"), 1000)
    phi = get_phi("cos2pi")
    envelope = decay_envelope(operator_correlation(op, phi, phi, 30), floor=1e-10)
    assert envelope.r_squared > 0.9
    assert 0.0 < envelope.rate < 1.0


def test_build_ulam_rejects_bad_requests() -> None:
    with pytest.raises(CapabilityError):
        build_ulam(make_system("henon"), 16)
    with pytest.raises(ParameterError) as exc:
        build_ulam(make_system("doubling"), 0)
    assert "N must be ≥ 1" in str(exc.value)


def test_stationary_error_unknown_without_closed_form() -> None:
    op = build_ulam(make_system("logistic", {"a": 3.9}), 64)
    assert stationary_l1_error(op) is None
    assert op.stationary.sum() == pytest.approx(1.0)


def test_bin_averages_of_identity_are_midpoints() -> None:
    op = build_ulam(make_system("doubling"), 8)
    npt.assert_allclose(bin_averages(op, lambda x: x), (np.arange(8) + 0.5) / 8, atol=1e-15)


def test_operator_correlations_vanish_for_doubling() -> None:
    op = build_ulam(make_system("doubling"), 1024)
    phi = get_phi("cos2pi")
    values = operator_correlation(op, phi, phi, 10)
    assert values[0] == pytest.approx(0.5, abs=1e-3)
    assert all(abs(v) <= 1e-3 for v in values[1:])


def test_operator_correlation_of_constant_is_zero() -> None:
    op = build_ulam(make_system("tent"), 16)
    assert operator_correlation(op, lambda x: np.full_like(x, 2.0), get_phi("cos2pi"), 3) == [0.0] * 4


def test_decay_envelope_recovers_geometric_rate() -> None:
    envelope = decay_envelope([1.0, 0.5, 0.25, 0.125, 0.0625])
    assert envelope.rate == pytest.approx(0.5)
    assert envelope.amplitude == pytest.approx(1.0)
    assert envelope.r_squared == pytest.approx(1.0)
    with pytest.raises(PreconditionError):
        decay_envelope([1.0, 0.0, 0.0, 0.0])


def test_matrix_csv_lists_sorted_triplets(tmp_path) -> None:
    op = build_ulam(make_system("doubling"), 2)
    path = write_matrix_csv(op, tmp_path / "matrix.csv")
    with path.open(encoding="utf-8") as handle:
        rows = list(csv.reader(handle))
    assert rows == [["row", "col", "value"], ["0", "0", "0.5"], ["0", "1", "0.5"], ["1", "0", "0.5"], ["1", "1", "0.5"]]
