"""Executor for validated run configurations."""
from __future__ import annotations

import csv
import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

from colorama import Fore, Style, init as colorama_init
from jsonschema import Draft7Validator

from ergotest.core.errors import COMPUTATIONAL_ERRORS, ErgotestError
from ergotest.core.models import ESTIMATE_SCHEMA
from ergotest.core.references import resolve_callable
from ergotest.devroye import ObservableFamily, estimate_constant_D, inequality_report
from ergotest.maps import DynamicalSystem, lyapunov_spectrum, make_system, orbit
from ergotest.montecarlo import (
    EnsembleSpec,
    clt_diagnostic,
    control_diagnostic,
    empirical_correlation,
    estimate_records,
    mean_from_values,
    observable_values,
    pair_variance_from_values,
    variance_from_values,
    write_correlation_csv,
)
from ergotest.observables import (
    FAMILY_BIRKHOFF,
    FAMILY_PAIR,
    FAMILY_WEIGHTED_SUP,
    PhiFunction,
    SeparatelyHoelderObservable,
    estimate_phi,
    get_phi,
    make_birkhoff,
    make_constant,
    make_pair_correlation,
    make_weighted_sup,
)
from ergotest.tower import (
    backward_contraction_check,
    build_first_return_tower,
    check_tower_axioms,
    level_masses,
    parse_interval,
    tower_summary,
    tower_ulam,
    write_branch_csv,
)
from ergotest.transfer import (
    build_ulam,
    decay_envelope,
    operator_correlation,
    reference_masses,
    stationary_l1_error,
    summary,
    write_matrix_csv,
)

from .models import ObservableConfig, PhiConfig, RunConfig

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_COMPUTATIONAL = 2

ARTIFACT_SCHEMA: Dict[str, Any] = {
    "type": "object",
    "required": ["command", "system", "params"],
    "properties": {
        "command": {"type": "string"},
        "system": {"type": "string"},
        "params": {"type": "object"},
        "master_seed": {"type": "integer", "minimum": 0},
        "variance": ESTIMATE_SCHEMA,
        "mean": ESTIMATE_SCHEMA,
        "pair_variance": ESTIMATE_SCHEMA,
        "monte_carlo": {"type": "array", "items": ESTIMATE_SCHEMA},
    },
}

_artifact_validator = Draft7Validator(ARTIFACT_SCHEMA)


@dataclass
class CommandResult:
    identifier: str
    status: str = "ok"
    details: str = ""
    artifacts: List[Path] = field(default_factory=list)


def config_digest(config: RunConfig) -> str:
    """First 12 hex digits of the SHA-256 of the canonical configuration document."""

    canonical = json.dumps(config.document, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]


class ArtifactWriter:
    """Tracks every file written for one run so a failed run leaves nothing behind."""

    def __init__(self, config: RunConfig) -> None:
        self.directory = Path(config.output_dir)
        self.stem = self.directory / f"{config.command}-{config.system}-{config_digest(config)}"
        self.formats = config.formats
        self.written: List[Path] = []

    def path(self, suffix: str, extra: str = "") -> Path:
        self.directory.mkdir(parents=True, exist_ok=True)
        target = self.stem.with_name(self.stem.name + extra).with_suffix(suffix)
        self.written.append(target)
        return target

    def write_json(self, payload: Dict[str, Any], extra: str = "") -> Optional[Path]:
        if "json" not in self.formats:
            return None
        errors = sorted(_artifact_validator.iter_errors(payload), key=lambda e: list(map(str, e.path)))
        if errors:
            lines = "; ".join(f"{'/'.join(map(str, err.path)) or 'root'}: {err.message}" for err in errors)
            raise ErgotestError(f"artifact failed schema validation: {lines}")
        target = self.path(".json", extra)
        target.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return target

    def write_csv(self, header: Sequence[str], rows: Sequence[Sequence[object]], extra: str = "") -> Optional[Path]:
        if "csv" not in self.formats:
            return None
        target = self.path(".csv", extra)
        with target.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
        return target

    def csv_path(self, extra: str = "") -> Optional[Path]:
        return self.path(".csv", extra) if "csv" in self.formats else None

    def cleanup(self) -> None:
        for target in self.written:
            try:
                target.unlink(missing_ok=True)
            except OSError as exc:
                logger.warning("could not remove %s: %s", target, exc)
        self.written.clear()


def run(config: RunConfig, *, use_color: bool = True) -> int:
    """Execute one command; returns the process exit code (0 ok, 1 invalid request or I/O error, 2 computation failed)."""

    colorama_init()
    identifier = f"{config.command} {config.system}"
    writer = ArtifactWriter(config)
    system = make_system(config.system, config.params)
    handler = _COMMANDS[config.command]
    try:
        details = handler(config, system, writer)
    except COMPUTATIONAL_ERRORS as exc:
        writer.cleanup()
        _print_result(CommandResult(identifier, "error", str(exc)), use_color=use_color)
        return EXIT_COMPUTATIONAL
    except ErgotestError as exc:
        writer.cleanup()
        _print_result(CommandResult(identifier, "failed", str(exc)), use_color=use_color)
        return EXIT_INVALID
    except OSError as exc:
        writer.cleanup()
        _print_result(CommandResult(identifier, "failed", f"I/O error: {exc}"), use_color=use_color)
        return EXIT_INVALID
    except BaseException:
        writer.cleanup()
        raise
    result = CommandResult(identifier, "ok", details, [p for p in writer.written if p.exists()])
    _print_result(result, use_color=use_color)
    return EXIT_OK


def _header(config: RunConfig, system: DynamicalSystem) -> Dict[str, Any]:
    return {"command": config.command, "system": system.name, "params": dict(system.params)}


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def build_phi(config: PhiConfig, seed: int = 0) -> PhiFunction:
    if config.name is not None:
        return get_phi(config.name)
    func = resolve_callable(config.callable)
    return estimate_phi(config.callable, func, config.eta, config.support, seed=seed)


def build_observable(config: ObservableConfig, n: Optional[int], seed: int = 0) -> SeparatelyHoelderObservable:
    phi = build_phi(config.phi, seed) if config.phi is not None else None
    if config.kind == FAMILY_WEIGHTED_SUP:
        weights = config.weights if config.weights else [1.0 / n] * n
        return make_weighted_sup(phi, weights)
    if config.kind == FAMILY_BIRKHOFF:
        return make_birkhoff(phi, n)
    if config.kind == FAMILY_PAIR:
        return make_pair_correlation(phi, n)
    return make_constant(config.value, n)


def _ensemble(config: RunConfig, system: DynamicalSystem) -> EnsembleSpec:
    return EnsembleSpec(
        system=system,
        sample_count=config.sample_count,
        burn_in=config.burn_in,
        seed_distribution=config.seed_distribution,
        master_seed=config.master_seed,
        method=config.method,
        workers=config.workers,
    )


def _simulate(config: RunConfig, system: DynamicalSystem, writer: ArtifactWriter) -> str:
    trajectory = orbit(system, config.seed_state, config.burn_in or 0, config.length)
    states = trajectory.states.reshape(len(trajectory), system.state_dim)
    columns = ["k", "x"] if system.state_dim == 1 else ["k", "x", "y"]
    writer.write_csv(columns, [[k, *(_fmt(v) for v in row)] for k, row in enumerate(states)])
    payload = _header(config, system)
    payload.update(
        {
            "burn_in": trajectory.burn_in,
            "length": len(trajectory),
            "final_state": [float(v) for v in states[-1]],
        }
    )
    details = f"{len(trajectory)} states"
    if config.steps is not None:
        exponents = lyapunov_spectrum(system, config.seed_state, config.steps)
        payload["lyapunov"] = exponents
        payload["lyapunov_steps"] = config.steps
        details += ", lyapunov=" + ", ".join(f"{v:.6g}" for v in exponents)
    writer.write_json(payload)
    return details


def _density(config: RunConfig, system: DynamicalSystem, writer: ArtifactWriter) -> str:
    op = build_ulam(system, config.N)
    masses = op.stationary
    error = stationary_l1_error(op)
    reference = reference_masses(system, op.bins) if error is not None else None
    rows = []
    for i in range(op.bins):
        row = [i, _fmt(op.edges[i]), _fmt(op.edges[i + 1]), _fmt(masses[i])]
        row.append(_fmt(reference[i]) if reference is not None else "")
        rows.append(row)
    writer.write_csv(["bin", "left", "right", "mass", "reference"], rows)
    payload = _header(config, system)
    payload.update({"N": op.bins, "stationary_l1_error": error})
    writer.write_json(payload)
    return f"N={op.bins}" + (f", L1 error={error:.3e}" if error is not None else "")


def _spectrum(config: RunConfig, system: DynamicalSystem, writer: ArtifactWriter) -> str:
    op = build_ulam(system, config.N)
    record = summary(op)
    target = writer.csv_path()
    if target is not None:
        write_matrix_csv(op, target)
    payload = _header(config, system)
    payload.update(record)
    writer.write_json(payload)
    return f"N={op.bins}, lambda2={op.lambda2:.6g}, gap={op.gap:.6g}"


def _variance(config: RunConfig, system: DynamicalSystem, writer: ArtifactWriter) -> str:
    observable = build_observable(config.observable, config.n, config.master_seed)
    spec = _ensemble(config, system)
    values, discarded = observable_values(observable, spec)
    variance = variance_from_values(values, spec, discarded)
    mean = mean_from_values(values, spec, discarded)
    pair = pair_variance_from_values(values, spec, discarded)
    payload = _header(config, system)
    payload.update(variance.to_record())
    payload.update(
        {
            "master_seed": config.master_seed,
            "family": observable.label,
            "n": observable.arity,
            "eta": observable.eta,
            "sum_L2": observable.sum_l2,
            "exact_constants": observable.exact,
            "sampler": spec.sampler_name,
            "discarded": discarded,
            "variance": variance.to_record(),
            "mean": mean.to_record(),
            "pair_variance": pair.to_record(),
        }
    )
    writer.write_csv(
        ["quantity", "value", "std_error", "ci_low", "ci_high"],
        [
            [name, _fmt(est.value), _fmt(est.std_error), _fmt(est.ci_low), _fmt(est.ci_high)]
            for name, est in (("variance", variance), ("mean", mean), ("pair_variance", pair))
        ],
    )
    writer.write_json(payload)
    return f"{observable.label} n={observable.arity}: var={variance.value:.6g} ± {variance.std_error:.2g}"


def _devroye(config: RunConfig, system: DynamicalSystem, writer: ArtifactWriter) -> str:
    families = []
    for item in config.families:
        phi = build_phi(item.phi, config.master_seed) if item.phi is not None else None
        families.append(ObservableFamily(kind=item.kind, phi=phi, value=item.value))
    eta = config.eta
    if eta is None:
        eta = next((f.eta for f in families if f.eta is not None), 1.0)
    spec = _ensemble(config, system)
    reports, constant = estimate_constant_D(system, families, config.n_grid, eta, spec)
    formats = [fmt for fmt in config.formats]
    for fmt in formats:
        writer.path(f".{fmt}")
    inequality_report(reports, writer.stem, formats=formats, summary=constant)
    return f"{len(reports)} ratio(s), D_running={constant.d_running:.6g}"


def _tower(config: RunConfig, system: DynamicalSystem, writer: ArtifactWriter) -> str:
    tower = build_first_return_tower(system, parse_interval(config.base), config.q_max)
    record = tower_summary(tower)
    axioms = check_tower_axioms(tower)
    contraction = backward_contraction_check(tower, config.contraction_pairs, seed=config.master_seed)
    payload = _header(config, system)
    payload.update(record)
    payload["master_seed"] = config.master_seed
    payload["return_time_distribution"] = {str(n): float(m) for n, m in tower.return_time_distribution().items()}
    payload["axioms"] = axioms.to_record()
    payload["contraction"] = contraction.to_record()
    if config.bins_per_level is not None:
        op = tower_ulam(tower, config.bins_per_level)
        payload["operator"] = {
            "bins_per_level": config.bins_per_level,
            "states": op.bins,
            "lambda2": op.lambda2,
            "gap": op.gap,
            "level_masses": [float(m) for m in level_masses(op)],
        }
    target = writer.csv_path()
    if target is not None:
        write_branch_csv(tower, target)
    writer.write_json(payload)
    kac = record["kac_product"]
    return (
        f"{record['branch_count']} branches, kac={'n/a' if kac is None else f'{kac:.12g}'}, "
        f"contraction violations={contraction.violations}"
    )


def _correlations(config: RunConfig, system: DynamicalSystem, writer: ArtifactWriter) -> str:
    phi = build_phi(config.phi, config.master_seed)
    psi = build_phi(config.psi, config.master_seed) if config.psi is not None else phi
    estimates = empirical_correlation(phi, psi, system, config.lags, _ensemble(config, system))
    payload = _header(config, system)
    payload.update(
        {
            "master_seed": config.master_seed,
            "phi": phi.name,
            "psi": psi.name,
            "lags": config.lags,
            "monte_carlo": estimate_records(estimates),
        }
    )
    details = f"{config.lags} lag(s), |C(1)|={abs(estimates[1].value):.3g}"
    if config.N is not None:
        op = build_ulam(system, config.N)
        values = operator_correlation(op, phi, psi, config.lags)
        payload["operator"] = {"N": op.bins, "lambda2": op.lambda2, "values": values}
        payload["decay"] = _decay_record(values)
        details += f", operator lambda2={op.lambda2:.6g}"
    target = writer.csv_path()
    if target is not None:
        write_correlation_csv(estimates, target)
    writer.write_json(payload)
    return details


def _decay_record(values: Sequence[float]) -> Optional[Dict[str, Any]]:
    try:
        envelope = decay_envelope(values)
    except ErgotestError:
        return None
    return {
        "amplitude": envelope.amplitude,
        "rate": envelope.rate,
        "r_squared": envelope.r_squared,
        "lags": list(envelope.lags),
    }


def _clt(config: RunConfig, system: DynamicalSystem, writer: ArtifactWriter) -> str:
    phi = build_phi(config.phi, config.master_seed)
    spec = _ensemble(config, system)
    result = clt_diagnostic(phi, system, config.n, spec)
    payload = _header(config, system)
    payload.update(result.to_record())
    payload.update({"master_seed": config.master_seed, "phi": phi.name, "n": config.n, "sampler": spec.sampler_name})
    details = f"n={config.n}: KS={result.statistic:.4g}, p={result.p_value:.4g}"
    if config.control:
        control = control_diagnostic(config.sample_count, config.master_seed)
        payload["control"] = control.to_record()
        details += f", control p={control.p_value:.4g}"
    writer.write_json(payload)
    return details


_COMMANDS: Dict[str, Callable[[RunConfig, DynamicalSystem, ArtifactWriter], str]] = {
    "simulate": _simulate,
    "density": _density,
    "spectrum": _spectrum,
    "variance": _variance,
    "devroye": _devroye,
    "tower": _tower,
    "correlations": _correlations,
    "clt": _clt,
}


def _print_result(result: CommandResult, *, use_color: bool = True) -> None:
    label, color = _format_status(result.status, use_color=use_color)
    reset = Style.RESET_ALL if use_color else ""
    print(f"{color}{label:<6}{reset} {result.identifier}")
    if result.details:
        print(f"    detail: {result.details}")
    if result.artifacts:
        print(f"    artifacts: {', '.join(str(p) for p in result.artifacts)}")


def _format_status(status: str, *, use_color: bool) -> tuple[str, str]:
    label = {"ok": "OK", "failed": "FAIL", "error": "ERROR"}.get(status, status.upper())
    if not use_color:
        return label, ""
    color = Fore.GREEN if status == "ok" else Fore.RED
    return label, color
