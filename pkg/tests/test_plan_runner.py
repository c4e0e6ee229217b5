from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import pytest

from ergotest.plan import EXIT_COMPUTATIONAL, EXIT_INVALID, EXIT_OK, config_digest, run, validate
from ergotest.plan.runner import ArtifactWriter


def _config(tmp_path: Path, text: str):
    return validate(text, [f"output_dir={tmp_path.as_posix()}"])


def _read_json(tmp_path: Path) -> dict:
    (path,) = sorted(tmp_path.glob("*.json"))
    return json.loads(path.read_text(encoding="utf-8"))


def test_spectrum_doubling_writes_named_artifacts(tmp_path: Path, capsys) -> None:
    config = _config(tmp_path, '{"command": "spectrum", "system": "doubling", "N": 4}')
    assert run(config, use_color=False) == EXIT_OK
    stem = f"spectrum-doubling-{config_digest(config)}"
    assert sorted(p.name for p in tmp_path.iterdir()) == [f"{stem}.csv", f"{stem}.json"]
    payload = _read_json(tmp_path)
    assert payload["command"] == "spectrum"
    assert payload["params"] == {}
    assert abs(payload["lambda2"]) <= 1e-9
    assert payload["gap"] == pytest.approx(1.0, abs=1e-9)
    with (tmp_path / f"{stem}.csv").open(encoding="utf-8") as handle:
        rows = list(csv.reader(handle))
    assert rows[0] == ["row", "col", "value"]
    assert len(rows) == 1 + 8
    out = capsys.readouterr().out
    assert out.startswith("OK     spectrum doubling")
    assert "lambda2=" in out


def test_formats_restrict_outputs(tmp_path: Path) -> None:
    config = _config(tmp_path, '{"command": "spectrum", "system": "doubling", "N": 4, "formats": ["json"]}')
    assert run(config, use_color=False) == EXIT_OK
    assert [p.suffix for p in tmp_path.iterdir()] == [".json"]


def test_simulate_with_lyapunov(tmp_path: Path) -> None:
    config = _config(tmp_path, '{"command": "simulate", "system": "doubling", "seed": 0.1, "length": 3, "steps": 1000}')
    assert run(config, use_color=False) == EXIT_OK
    payload = _read_json(tmp_path)
    assert payload["length"] == 3
    assert payload["final_state"] == [pytest.approx(0.4)]
    assert payload["lyapunov"][0] == pytest.approx(math.log(2.0), abs=1e-9)
    (table,) = tmp_path.glob("*.csv")
    assert table.read_text(encoding="utf-8").splitlines()[0] == "k,x"


def test_divergence_exits_two_and_leaves_nothing(tmp_path: Path, capsys) -> None:
    config = _config(tmp_path, '{"command": "simulate", "system": "henon", "seed": [10, 10], "length": 5}')
    assert run(config, use_color=False) == EXIT_COMPUTATIONAL
    assert list(tmp_path.glob("*")) == []
    out = capsys.readouterr().out
    assert out.startswith("ERROR")
    assert "diverged" in out


def test_density_tent_matches_lebesgue(tmp_path: Path) -> None:
    config = _config(tmp_path, '{"command": "density", "system": "tent", "N": 16}')
    assert run(config, use_color=False) == EXIT_OK
    payload = _read_json(tmp_path)
    assert payload["N"] == 16
    assert payload["stationary_l1_error"] <= 1e-9
    (table,) = tmp_path.glob("*.csv")
    lines = table.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "bin,left,right,mass,reference"
    assert len(lines) == 17


def test_variance_oracle_and_record_schema(tmp_path: Path) -> None:
    config = _config(
        tmp_path,
        '{"command": "variance", "system": "doubling", "family": "birkhoff-cos2pi", '
        '"n": 10, "sample_count": 20000, "master_seed": 1}',
    )
    assert run(config, use_color=False) == EXIT_OK
    payload = _read_json(tmp_path)
    assert abs(payload["value"] - 0.05) <= 4 * payload["std_error"]
    assert payload["variance"]["n_samples"] == 20000
    assert payload["family"] == "birkhoff-cos2pi"
    assert payload["sum_L2"] == pytest.approx(10 * (2 * math.pi / 10) ** 2)
    assert payload["exact_constants"] is True
    assert abs(payload["mean"]["value"]) <= 4 * payload["mean"]["std_error"] + 1e-12


def test_variance_reproducible_across_workers(tmp_path: Path) -> None:
    text = '{"command": "variance", "system": "doubling", "family": "pair-correlation-cos2pi", "n": 8, "sample_count": 3000}'
    first = validate(text, [f"output_dir={(tmp_path / 'a').as_posix()}", "workers=1"])
    second = validate(text, [f"output_dir={(tmp_path / 'b').as_posix()}", "workers=3"])
    assert run(first, use_color=False) == EXIT_OK
    assert run(second, use_color=False) == EXIT_OK
    for suffix in ("csv", "json"):
        (left,) = (tmp_path / "a").glob(f"*.{suffix}")
        (right,) = (tmp_path / "b").glob(f"*.{suffix}")
        assert left.name == right.name
        assert left.read_bytes() == right.read_bytes()


def test_tower_doubling(tmp_path: Path) -> None:
    config = _config(tmp_path, '{"command": "tower", "system": "doubling", "contraction_pairs": 200, "bins_per_level": 2}')
    assert run(config, use_color=False) == EXIT_OK
    payload = _read_json(tmp_path)
    assert payload["base"] == "0/2^0..1/2^1"
    assert abs(payload["kac_product"] - 1.0) <= 1e-6
    assert payload["fitted_log_theta"] == pytest.approx(-math.log(2.0), abs=1e-9)
    assert payload["return_time_distribution"]["1"] == pytest.approx(0.5)
    assert payload["contraction"]["violations"] == 0
    assert payload["operator"]["bins_per_level"] == 2


def test_correlations_with_operator(tmp_path: Path) -> None:
    config = _config(
        tmp_path,
        '{"command": "correlations", "system": "doubling", "phi": "cos2pi", "lags": 3, "N": 64, "sample_count": 5000}',
    )
    assert run(config, use_color=False) == EXIT_OK
    payload = _read_json(tmp_path)
    assert len(payload["monte_carlo"]) == 4
    assert payload["operator"]["N"] == 64
    assert len(payload["operator"]["values"]) == 4
    assert payload["operator"]["values"][0] == pytest.approx(0.5, abs=1e-2)
    assert "decay" in payload


def test_clt_with_control(tmp_path: Path) -> None:
    config = _config(
        tmp_path,
        '{"command": "clt", "system": "doubling", "phi": "cos2pi", "n": 100, "control": true, "formats": ["json"]}',
    )
    assert run(config, use_color=False) == EXIT_OK
    payload = _read_json(tmp_path)
    assert payload["n_samples"] == 10_000
    assert 0.0 <= payload["p_value"] <= 1.0
    assert payload["control"]["p_value"] > 0.001


def test_artifact_writer_cleanup(tmp_path: Path) -> None:
    config = _config(tmp_path / "out", '{"command": "spectrum", "system": "doubling", "N": 2}')
    writer = ArtifactWriter(config)
    table = writer.write_csv(["a"], [[1]])
    document = writer.write_json({"command": "spectrum", "system": "doubling", "params": {}})
    assert table.exists() and document.exists()
    writer.cleanup()
    assert not table.exists()
    assert not document.exists()
    assert writer.written == []


def test_unwritable_output_dir_fails_cleanly(tmp_path: Path, capsys) -> None:
    blocker = tmp_path / "blocker"
    blocker.write_text("keep", encoding="utf-8")
    config = _config(blocker / "sub", '{"command": "spectrum", "system": "doubling", "N": 4}')
    assert run(config, use_color=False) == EXIT_INVALID
    assert blocker.read_text(encoding="utf-8") == "keep"
    assert sorted(p.name for p in tmp_path.iterdir()) == ["blocker"]
    out = capsys.readouterr().out
    assert out.startswith("FAIL   spectrum doubling")
    assert "I/O error" in out
