"""YAML/JSON run-configuration loader with aggregated validation."""
from __future__ import annotations

import os
from pathlib import Path
from typing import Any, Dict, List, Mapping, MutableMapping, Optional, Sequence, Tuple

import yaml
from jsonschema import Draft7Validator

from ergotest.core.errors import CapabilityError, ConfigError, ErgotestError, ParameterError
from ergotest.maps.catalog import available_systems, make_system
from ergotest.observables.families import FAMILIES, FAMILY_CONSTANT, FAMILY_WEIGHTED_SUP
from ergotest.observables.phi import available_phi, get_phi
from ergotest.tower.dyadic import parse_interval

from .models import COMMANDS, FORMATS, MONTE_CARLO_COMMANDS, ObservableConfig, PhiConfig, RunConfig

OUTPUT_DIR_ENV = "ERGOTEST_OUTPUT_DIR"

_NUMBER = {"type": "number"}
_INTEGER = {"type": "integer"}
_PHI = {
    "oneOf": [
        {"type": "string"},
        {
            "type": "object",
            "additionalProperties": False,
            "required": ["callable"],
            "properties": {
                "callable": {"type": "string"},
                "eta": _NUMBER,
                "support": {"type": "array", "items": _NUMBER, "minItems": 2, "maxItems": 2},
            },
        },
    ]
}

CONFIG_SCHEMA: Dict[str, Any] = {
    "type": "object",
    "additionalProperties": False,
    "required": ["command", "system"],
    "properties": {
        "command": {"type": "string"},
        "system": {"type": "string"},
        "params": {"type": "object", "additionalProperties": _NUMBER},
        "family": {"oneOf": [{"type": "string"}, {"type": "array", "items": {"type": "string"}, "minItems": 1}]},
        "phi": _PHI,
        "psi": _PHI,
        "weights": {"type": "array", "items": _NUMBER},
        "value": _NUMBER,
        "seed": {"oneOf": [_NUMBER, {"type": "array", "items": _NUMBER}]},
        "length": _INTEGER,
        "steps": _INTEGER,
        "N": _INTEGER,
        "n": _INTEGER,
        "n_grid": {"type": "array", "items": _INTEGER, "minItems": 1},
        "eta": _NUMBER,
        "lags": _INTEGER,
        "q_max": _INTEGER,
        "base": {"type": "string"},
        "bins_per_level": _INTEGER,
        "contraction_pairs": _INTEGER,
        "sample_count": _INTEGER,
        "burn_in": _INTEGER,
        "seed_distribution": {"type": "string"},
        "method": {"type": "string"},
        "master_seed": _INTEGER,
        "control": {"type": "boolean"},
        "output_dir": {"type": "string"},
        "formats": {"type": "array", "items": {"enum": list(FORMATS)}, "uniqueItems": True},
        "workers": _INTEGER,
    },
}

_validator = Draft7Validator(CONFIG_SCHEMA)

_FAMILY_ALIASES = {"pair-correlation": "pair_correlation", "weighted-sup": "weighted_sup"}


def load_config(path: str, overrides: Sequence[str] = ()) -> RunConfig:
    """Load and validate a run-configuration file."""

    config_path = Path(path).expanduser()
    try:
        text = config_path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError([f"cannot read configuration '{path}': {exc}"]) from exc
    return validate(text, overrides)


def validate(text: str, overrides: Sequence[str] = ()) -> RunConfig:
    """Parse raw YAML/JSON text, apply ``key=value`` overrides and validate everything at once."""

    try:
        raw = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise ConfigError([f"configuration is not valid YAML/JSON: {exc}"]) from exc
    if not isinstance(raw, MutableMapping):
        raise ConfigError(["configuration must contain a mapping at the top level"])
    for item in overrides:
        apply_override(raw, item)

    errors = sorted(_validator.iter_errors(raw), key=lambda e: list(map(str, e.path)))
    if errors:
        raise ConfigError([f"{'/'.join(map(str, err.path)) or 'root'}: {err.message}" for err in errors])

    violations: List[str] = []
    config = _build(raw, violations)
    if violations:
        raise ConfigError(violations)
    assert config is not None
    return config


def apply_override(raw: MutableMapping[str, Any], assignment: str) -> None:
    key, sep, value = assignment.partition("=")
    key = key.strip()
    if not sep or not key:
        raise ConfigError([f"override '{assignment}' must look like key=value"])
    target = raw
    parts = key.split(".")
    for part in parts[:-1]:
        child = target.get(part)
        if not isinstance(child, MutableMapping):
            child = {}
            target[part] = child
        target = child
    target[parts[-1]] = parse_value(value)


def parse_value(raw: str) -> object:
    text = raw.strip()
    if not text:
        return ""
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError:
        return text


def _at_least(violations: List[str], raw: Mapping[str, Any], key: str, minimum: int) -> None:
    value = raw.get(key)
    if value is not None and value < minimum:
        violations.append(f"{key} must be ≥ {minimum}")


def _require(violations: List[str], raw: Mapping[str, Any], key: str, command: str) -> None:
    if raw.get(key) is None:
        violations.append(f"{key} is required for command '{command}'")


def _phi_config(raw: Any, violations: List[str], key: str) -> Optional[PhiConfig]:
    if raw is None:
        return None
    if isinstance(raw, str):
        if raw.lower() not in available_phi():
            violations.append(f"{key}: unknown phi '{raw}'. Available: {', '.join(available_phi())}")
            return None
        phi = get_phi(raw)
        return PhiConfig(name=phi.name, eta=phi.eta, support=phi.support)
    eta = float(raw.get("eta", 1.0))
    if not 0.0 < eta <= 1.0:
        violations.append(f"{key}.eta must lie in (0, 1]")
    support = tuple(float(v) for v in raw.get("support", (0.0, 1.0)))
    if not support[0] < support[1]:
        violations.append(f"{key}.support must be an increasing pair")
    return PhiConfig(callable=str(raw["callable"]), eta=eta, support=support)


def _split_family(text: str) -> Tuple[str, Optional[str]]:
    normalized = text.strip().lower()
    for alias, canonical in _FAMILY_ALIASES.items():
        normalized = normalized.replace(alias, canonical)
    kind, _, phi = normalized.partition("-")
    return kind, phi or None


def _families(
    raw: Mapping[str, Any], default_phi: Optional[PhiConfig], violations: List[str]
) -> Tuple[ObservableConfig, ...]:
    spec = raw.get("family")
    if spec is None:
        return ()
    names = [spec] if isinstance(spec, str) else list(spec)
    families = []
    for name in names:
        kind, phi_name = _split_family(name)
        if kind not in FAMILIES:
            violations.append(f"family: unknown family '{kind}'. Available: {', '.join(FAMILIES)}")
            continue
        phi = None
        if kind != FAMILY_CONSTANT:
            phi = _phi_config(phi_name, violations, "family") if phi_name is not None else default_phi
            if phi is None:
                if phi_name is None and raw.get("phi") is None:
                    violations.append(f"family '{name}' needs a phi (e.g. '{kind}-cos2pi' or a 'phi' key)")
                continue
        weights = raw.get("weights") if kind == FAMILY_WEIGHTED_SUP else None
        if weights is not None and any(w < 0 for w in weights):
            violations.append("weights must be non-negative")
        families.append(ObservableConfig(kind=kind, phi=phi, weights=weights, value=float(raw.get("value", 0.0))))
    return tuple(families)


def _build(raw: Mapping[str, Any], violations: List[str]) -> Optional[RunConfig]:
    command = raw["command"]
    if command not in COMMANDS:
        violations.append(f"command: unknown command '{command}'. Available: {', '.join(COMMANDS)}")

    system = None
    name = raw["system"]
    if name.lower() not in available_systems():
        violations.append(f"system: unknown system '{name}'. Supported systems: {', '.join(available_systems())}")
    else:
        try:
            system = make_system(name, raw.get("params"))
        except ParameterError as exc:
            violations.append(f"params: {exc}")

    for key, minimum in (
        ("N", 1), ("n", 1), ("length", 1), ("lags", 1), ("q_max", 1), ("bins_per_level", 1),
        ("contraction_pairs", 1), ("burn_in", 0), ("workers", 1), ("master_seed", 0),
    ):
        _at_least(violations, raw, key, minimum)
    if any(n < 1 for n in raw.get("n_grid", ())):
        violations.append("n_grid entries must be ≥ 1")
    if raw.get("master_seed", 0) >= 2**64:
        violations.append("master_seed must be < 2^64")
    if raw.get("steps") is not None and raw["steps"] < 100:
        violations.append("steps must be ≥ 100")
    if raw.get("seed_distribution") not in (None, "uniform", "attractor_box"):
        violations.append("seed_distribution must be one of uniform, attractor_box")
    if raw.get("method") not in (None, "iid-windows", "batch-means"):
        violations.append("method must be one of iid-windows, batch-means")

    phi = _phi_config(raw.get("phi"), violations, "phi")
    families = _families(raw, phi, violations)
    psi = _phi_config(raw.get("psi"), violations, "psi")
    eta = raw.get("eta")
    if eta is not None and not 0.0 < eta <= 1.0:
        violations.append("eta must lie in (0, 1]")

    if system is not None:
        _check_command(command, raw, system, families, violations)
        if not system.is_interval_map:
            candidates = [family.phi for family in families] + [phi, psi]
            for used in dict.fromkeys(c for c in candidates if c is not None and c.name is not None):
                if used.support != (-float("inf"), float("inf")):
                    violations.append(
                        f"phi '{used.name}' is defined on [{used.support[0]:g}, {used.support[1]:g}] "
                        f"but system '{system.name}' is planar"
                    )

    if violations:
        return None
    output_dir = os.environ.get(OUTPUT_DIR_ENV) or raw.get("output_dir") or "ergotest-results"
    document = {key: value for key, value in raw.items() if key not in ("workers", "output_dir")}
    n_grid = tuple(raw.get("n_grid") or ((raw["n"],) if raw.get("n") else ()))
    return RunConfig(
        command=command,
        system=system.name,
        params=dict(system.params),
        families=families,
        phi=phi,
        psi=psi,
        seed_state=raw.get("seed"),
        length=raw.get("length", 1000),
        steps=raw.get("steps"),
        N=raw.get("N"),
        n=raw.get("n"),
        n_grid=n_grid,
        eta=eta,
        lags=raw.get("lags", 10),
        q_max=raw.get("q_max", 30),
        base=raw.get("base", "0..1/2"),
        bins_per_level=raw.get("bins_per_level"),
        contraction_pairs=raw.get("contraction_pairs", 1000),
        sample_count=raw.get("sample_count", 10_000),
        burn_in=raw.get("burn_in"),
        seed_distribution=raw.get("seed_distribution"),
        method=raw.get("method", "iid-windows"),
        master_seed=raw.get("master_seed", 0),
        control=bool(raw.get("control", False)),
        output_dir=Path(output_dir),
        formats=tuple(raw.get("formats") or ("csv", "json")),
        workers=raw.get("workers", 1),
        document=document,
    )


def _check_command(command: str, raw: Mapping[str, Any], system, families, violations: List[str]) -> None:
    if command == "simulate":
        _require(violations, raw, "seed", command)
        seed = raw.get("seed")
        if seed is not None:
            dim = 1 if not isinstance(seed, list) else len(seed)
            if dim != system.state_dim:
                violations.append(f"seed must have dimension {system.state_dim} for system '{system.name}'")
    if command in ("density", "spectrum"):
        _require(violations, raw, "N", command)
    if command in ("density", "spectrum") or (command == "correlations" and raw.get("N") is not None):
        try:
            system.monotone_branches()
        except CapabilityError as exc:
            violations.append(f"{command}: {exc}")
    if command == "tower":
        try:
            system.linear_branches()
        except CapabilityError as exc:
            violations.append(f"tower: {exc}")
        try:
            parse_interval(raw.get("base", "0..1/2"))
        except ErgotestError as exc:
            violations.append(f"base: {exc}")
    if command in ("variance", "devroye") and not families:
        violations.append(f"family is required for command '{command}'")
    if command == "variance" and not (families and families[0].weights):
        _require(violations, raw, "n", command)
    if command == "devroye" and not raw.get("n_grid") and raw.get("n") is None:
        violations.append("n_grid is required for command 'devroye'")
    if command in ("correlations", "clt"):
        if raw.get("phi") is None:
            violations.append(f"phi is required for command '{command}'")
    if command == "clt":
        _require(violations, raw, "n", command)
        _at_least(violations, raw, "n", 100)
    if command in MONTE_CARLO_COMMANDS:
        minimum = 10_000 if command == "clt" else 100
        if raw.get("sample_count", 10_000) < minimum:
            violations.append(f"sample_count must be ≥ {minimum}")
        if raw.get("seed_distribution") == "attractor_box" and system.attractor_box is None:
            violations.append(f"system '{system.name}' has no attractor box")
