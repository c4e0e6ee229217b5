from __future__ import annotations

import csv

import numpy as np
import numpy.testing as npt
import pytest

from ergotest.core.errors import DegeneracyError, ParameterError, PreconditionError
from ergotest.core.models import METHOD_BATCH, EstimateWithCI
from ergotest.maps import make_system
from ergotest.montecarlo import (
    EnsembleSpec,
    clt_diagnostic,
    control_diagnostic,
    empirical_correlation,
    estimate_mean,
    estimate_variance,
    ks_normality,
    pair_variance,
    sample_block,
    shifted_mean,
    write_correlation_csv,
)
from ergotest.montecarlo.sampling import sliding_blocks
from ergotest.observables import get_phi, make_birkhoff, make_constant, make_pair_correlation

COS = get_phi("cos2pi")


def test_ensemble_defaults_follow_system() -> None:
    doubling = EnsembleSpec(make_system("doubling"), 1000)
    assert doubling.burn_in == 0
    assert doubling.seed_distribution == "uniform"
    assert doubling.uses_lift and doubling.sampler_name == "digit-refresh"
    henon = EnsembleSpec(make_system("henon"), 1000)
    assert henon.burn_in == 1000
    assert henon.seed_distribution == "attractor_box"
    assert not henon.uses_lift
    assert EnsembleSpec(make_system("doubling"), 2049).block_count == 3


def test_ensemble_rejects_bad_requests() -> None:
    doubling = make_system("doubling")
    with pytest.raises(ParameterError):
        EnsembleSpec(doubling, 0)
    with pytest.raises(ParameterError):
        EnsembleSpec(doubling, 100, master_seed=-1)
    with pytest.raises(ParameterError):
        EnsembleSpec(doubling, 100, seed_distribution="attractor_box")
    with pytest.raises(ParameterError):
        EnsembleSpec(doubling, 100, method="bootstrap")


def test_sample_block_shapes() -> None:
    spec = EnsembleSpec(make_system("henon"), 1500, burn_in=10)
    windows, discarded = sample_block(spec, 4, 1)
    assert windows.shape == (1500 - 1024 - discarded, 4)
    assert np.all(np.abs(windows) < 2.0)


def test_shifted_mean_exact_for_constants() -> None:
    assert shifted_mean(np.full(1001, 0.1)) == 0.1


def test_estimate_ci_helpers() -> None:
    estimate = EstimateWithCI.from_standard_error(2.0, 0.5, 100, method="iid-windows", seed=3)
    assert estimate.ci_low == pytest.approx(2.0 - 1.96 * 0.5)
    assert estimate.covers(3.4) and not estimate.covers(3.6)
    assert estimate.scaled(0.5).std_error == 0.25
    assert estimate.to_record()["n_samples"] == 100


def test_variance_oracle_doubling_birkhoff() -> None:
    spec = EnsembleSpec(make_system("doubling"), 20_000, master_seed=1)
    estimate = estimate_variance(make_birkhoff(COS, 10), spec)
    assert estimate.covers(0.05, k=4)
    assert estimate.method == "iid-windows"
    assert estimate.sample_count == 20_000


def test_identity_observable_follows_uniform_law() -> None:
    spec = EnsembleSpec(make_system("doubling"), 10_000, master_seed=4)
    K = make_birkhoff(get_phi("identity"), 1)
    assert estimate_mean(K, spec).covers(0.5, k=4)
    assert estimate_variance(K, spec).covers(1.0 / 12.0, k=4)
    assert pair_variance(K, spec).covers(1.0 / 12.0, k=4)


def test_mean_of_birkhoff_average_is_zero() -> None:
    spec = EnsembleSpec(make_system("tent"), 10_000, master_seed=2)
    assert estimate_mean(make_birkhoff(COS, 10), spec).covers(0.0, k=4)


def test_pair_variance_agrees_with_variance() -> None:
    spec = EnsembleSpec(make_system("doubling"), 20_000, master_seed=5)
    assert pair_variance(make_birkhoff(COS, 10), spec).covers(0.05, k=4)


def test_constant_observable_has_exactly_zero_variance() -> None:
    spec = EnsembleSpec(make_system("henon"), 2000, master_seed=1)
    estimate = estimate_variance(make_constant(0.1, 5), spec)
    assert estimate.value == 0.0
    assert estimate.std_error == 0.0


def test_estimates_do_not_depend_on_workers() -> None:
    doubling = make_system("doubling")
    K = make_pair_correlation(COS, 6)
    serial = estimate_variance(K, EnsembleSpec(doubling, 5000, master_seed=9, workers=1))
    parallel = estimate_variance(K, EnsembleSpec(doubling, 5000, master_seed=9, workers=4))
    assert serial == parallel


def test_batch_means_variance() -> None:
    spec = EnsembleSpec(make_system("doubling"), 20_000, master_seed=4, method=METHOD_BATCH)
    estimate = estimate_variance(make_birkhoff(COS, 10), spec)
    assert estimate.method == METHOD_BATCH
    assert estimate.covers(0.05, k=4)


def test_variance_requires_enough_samples() -> None:
    with pytest.raises(ParameterError):
        estimate_variance(make_birkhoff(COS, 3), EnsembleSpec(make_system("doubling"), 50))


def test_empirical_correlation_doubling() -> None:
    doubling = make_system("doubling")
    estimates = empirical_correlation(COS, COS, doubling, 10, EnsembleSpec(doubling, 10_000, master_seed=3))
    assert len(estimates) == 11
    assert estimates[0].covers(0.5, k=4)
    for estimate in estimates[1:]:
        assert abs(estimate.value) <= 4 * estimate.std_error


def test_empirical_correlation_checks_system() -> None:
    spec = EnsembleSpec(make_system("tent"), 1000)
    with pytest.raises(PreconditionError):
        empirical_correlation(COS, COS, make_system("doubling"), 3, spec)


def test_correlation_csv(tmp_path) -> None:
    estimates = [EstimateWithCI.from_standard_error(0.5, 0.01, 100, method="iid-windows", seed=0)]
    path = write_correlation_csv(estimates, tmp_path / "corr.csv")
    with path.open(encoding="utf-8") as handle:
        assert list(csv.reader(handle)) == [["lag", "value", "std_error"], ["0", "0.5", "0.01"]]


def test_sliding_blocks_cover_every_offset() -> None:
    values = np.arange(10.0)
    blocks = list(sliding_blocks(values, 3, 8))
    npt.assert_array_equal(np.concatenate(blocks)[:, 0], np.arange(8.0))


def test_clt_diagnostic_doubling() -> None:
    doubling = make_system("doubling")
    result = clt_diagnostic(COS, doubling, 100, EnsembleSpec(doubling, 10_000, master_seed=0))
    assert result.sample_count == 10_000
    assert result.p_value > 0.001
    assert result.std == pytest.approx(np.sqrt(50.0), rel=0.05)


def test_clt_requires_long_windows_and_many_samples() -> None:
    doubling = make_system("doubling")
    with pytest.raises(ParameterError):
        clt_diagnostic(COS, doubling, 50, EnsembleSpec(doubling, 10_000))
    with pytest.raises(ParameterError):
        clt_diagnostic(COS, doubling, 100, EnsembleSpec(doubling, 1000))


def test_gaussian_control_passes() -> None:
    assert control_diagnostic(10_000, 0).p_value > 0.001


def test_ks_normality_rejects_constant_sums() -> None:
    with pytest.raises(DegeneracyError):
        ks_normality(np.ones(100))


@pytest.mark.slow
def test_variance_oracle_repetitions() -> None:
    doubling = make_system("doubling")
    for n in (10, 100):
        K = make_birkhoff(COS, n)
        for seed in range(10):
            estimate = estimate_variance(K, EnsembleSpec(doubling, 100_000, master_seed=seed))
            assert estimate.covers(1.0 / (2 * n), k=4)


@pytest.mark.slow
def test_clt_acceptance_runs() -> None:
    doubling = make_system("doubling")
    passes = sum(
        clt_diagnostic(COS, doubling, 1000, EnsembleSpec(doubling, 10_000, master_seed=seed)).p_value > 0.01
        for seed in range(10)
    )
    assert passes >= 9
