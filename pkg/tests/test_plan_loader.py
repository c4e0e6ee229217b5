from __future__ import annotations

import textwrap
from pathlib import Path

import pytest

from ergotest.core.errors import ConfigError
from ergotest.plan import config_digest, load_config, validate


def _write_config(tmp_path: Path, content: str) -> Path:
    path = tmp_path / "run.yaml"
    path.write_text(textwrap.dedent(content), encoding="utf-8")
    return path


def test_minimal_simulate_json() -> None:
    config = validate('{"command": "simulate", "system": "doubling", "seed": 0.1}')
    assert config.command == "simulate"
    assert config.system == "doubling"
    assert config.seed_state == 0.1
    assert config.length == 1000
    assert config.formats == ("csv", "json")


def test_load_yaml_file_with_params(tmp_path: Path) -> None:
    path = _write_config(
        tmp_path,
        """
        command: variance
        system: henon
        params: {a: 1.2}
        family: pair-correlation-cos2pi
        n: 10
        sample_count: 500
        """,
    )
    config = load_config(str(path))
    assert config.params == {"a": 1.2, "b": 0.3}
    (family,) = config.families
    assert family.kind == "pair_correlation"
    assert family.phi.name == "cos2pi"
    assert family.label == "pair_correlation-cos2pi"


def test_overrides_apply_before_validation() -> None:
    text = '{"command": "spectrum", "system": "doubling", "N": 0}'
    with pytest.raises(ConfigError):
        validate(text)
    config = validate(text, ["N=8"])
    assert config.N == 8


def test_range_errors_are_aggregated() -> None:
    with pytest.raises(ConfigError) as exc:
        validate('{"command": "spectrum", "system": "doubling", "N": 0, "lags": 0, "q_max": 0}')
    violations = exc.value.violations
    assert "N must be ≥ 1" in violations
    assert "lags must be ≥ 1" in violations
    assert "q_max must be ≥ 1" in violations
    assert "3 problem(s)" in str(exc.value)


def test_unknown_keys_rejected_by_name() -> None:
    with pytest.raises(ConfigError) as exc:
        validate('{"command": "simulate", "system": "doubling", "seed": 0.1, "colour": "red"}')
    assert "'colour'" in str(exc.value)


def test_unknown_system_lists_catalog() -> None:
    with pytest.raises(ConfigError) as exc:
        validate('{"command": "simulate", "system": "lorentz-gas", "seed": 0.1}')
    assert "doubling, henon, logistic, lozi, tent" in str(exc.value)


def test_unknown_command_and_phi() -> None:
    with pytest.raises(ConfigError) as exc:
        validate('{"command": "plot", "system": "doubling", "phi": "tanh"}')
    message = str(exc.value)
    assert "unknown command 'plot'" in message
    assert "unknown phi 'tanh'" in message


def test_command_requirements() -> None:
    cases = {
        '{"command": "variance", "system": "doubling", "family": "birkhoff-cos2pi"}': "n is required for command 'variance'",
        '{"command": "devroye", "system": "doubling", "family": "birkhoff-cos2pi"}': "n_grid is required",
        '{"command": "clt", "system": "doubling", "phi": "cos2pi", "n": 50}': "n must be ≥ 100",
        '{"command": "correlations", "system": "doubling"}': "phi is required for command 'correlations'",
        '{"command": "simulate", "system": "henon", "seed": 0.1}': "seed must have dimension 2",
        '{"command": "tower", "system": "logistic"}': "not a piecewise-linear Markov map",
        '{"command": "density", "system": "henon", "N": 10}': "not a piecewise monotone interval map",
        '{"command": "tower", "system": "doubling", "base": "0..1/3"}': "not a dyadic rational",
    }
    for text, expected in cases.items():
        with pytest.raises(ConfigError) as exc:
            validate(text)
        assert expected in str(exc.value), text


def test_family_needs_phi() -> None:
    with pytest.raises(ConfigError) as exc:
        validate('{"command": "variance", "system": "doubling", "family": "birkhoff", "n": 4}')
    assert "needs a phi" in str(exc.value)
    config = validate('{"command": "variance", "system": "doubling", "family": "birkhoff", "phi": "sqrt", "n": 4}')
    assert config.observable.phi.name == "sqrt"


def test_bounded_phi_rejected_on_planar_system() -> None:
    with pytest.raises(ConfigError) as exc:
        validate('{"command": "variance", "system": "lozi", "family": "birkhoff-identity", "n": 4}')
    assert "planar" in str(exc.value)


def test_callable_phi_config() -> None:
    config = validate(
        '{"command": "clt", "system": "doubling", "n": 100, '
        '"phi": {"callable": "numpy:sin", "eta": 1.0, "support": [0, 1]}}'
    )
    assert config.phi.callable == "numpy:sin"
    assert config.phi.support == (0.0, 1.0)


def test_output_dir_from_environment(monkeypatch, tmp_path: Path) -> None:
    monkeypatch.setenv("ERGOTEST_OUTPUT_DIR", str(tmp_path / "env"))
    config = validate('{"command": "simulate", "system": "doubling", "seed": 0.1, "output_dir": "ignored"}')
    assert config.output_dir == tmp_path / "env"


def test_digest_ignores_workers_and_output_dir() -> None:
    base = '{"command": "spectrum", "system": "doubling", "N": 4'
    first = validate(base + ', "workers": 1, "output_dir": "a"}')
    second = validate(base + ', "workers": 4, "output_dir": "b"}')
    third = validate(base + ', "master_seed": 1}')
    assert config_digest(first) == config_digest(second)
    assert config_digest(first) != config_digest(third)
    assert len(config_digest(first)) == 12


def test_unreadable_file(tmp_path: Path) -> None:
    with pytest.raises(ConfigError) as exc:
        load_config(str(tmp_path / "missing.yaml"))
    assert "cannot read configuration" in str(exc.value)


def test_invalid_yaml() -> None:
    with pytest.raises(ConfigError):
        validate("command: [unterminated")
