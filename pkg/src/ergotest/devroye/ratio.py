"""Devroye ratio ``var(K) / sum_j L_j^2`` and the empirical envelope of the constant D."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ergotest.core.errors import InconsistentConstantsError, ParameterError, PreconditionError
from ergotest.core.models import EstimateWithCI
from ergotest.maps.catalog import DynamicalSystem
from ergotest.montecarlo.estimators import estimate_variance
from ergotest.montecarlo.sampling import EnsembleSpec
from ergotest.observables.families import (
    FAMILY_BIRKHOFF,
    FAMILY_CONSTANT,
    FAMILY_PAIR,
    FAMILY_WEIGHTED_SUP,
    make_birkhoff,
    make_constant,
    make_pair_correlation,
    make_weighted_sup,
)
from ergotest.observables.observable import SeparatelyHoelderObservable
from ergotest.observables.phi import PhiFunction

logger = logging.getLogger(__name__)

CAVEAT_SRB = "srb-surrogate"
CAVEAT_ESTIMATED = "estimated-constants"
CAVEAT_DEGENERATE = "degenerate"


@dataclass(frozen=True)
class DevroyeReport:
    system: str
    family: str
    eta: float
    n: int
    variance: EstimateWithCI
    sum_l2: float
    ratio: EstimateWithCI
    d_running: float
    caveats: Tuple[str, ...] = ()
    seed: Optional[int] = None

    @property
    def degenerate(self) -> bool:
        return CAVEAT_DEGENERATE in self.caveats


def _caveats(observable: SeparatelyHoelderObservable, spec: EnsembleSpec) -> List[str]:
    notes: List[str] = []
    if not spec.uses_lift:
        notes.append(CAVEAT_SRB)
    if not observable.exact:
        notes.append(CAVEAT_ESTIMATED)
    return notes


def devroye_ratio(
    observable: SeparatelyHoelderObservable,
    system: DynamicalSystem,
    spec: EnsembleSpec,
) -> DevroyeReport:
    """Variance estimate, stored ``sum L_j^2`` and their ratio with a scaled interval."""

    if spec.system != system:
        raise PreconditionError(f"ensemble is for '{spec.system.name}', not '{system.name}'")
    sum_l2 = observable.sum_l2
    if not math.isfinite(sum_l2):
        raise ParameterError("sum of squared Hölder constants must be finite")
    # A nonzero multiple c*K has the ratio of K; the c^2 is factored out rather than sampled.
    root = observable.unscaled if observable.unscaled is not None and observable.scale != 0.0 else observable
    root_variance = estimate_variance(root, spec)
    variance = root_variance if root is observable else root_variance.scaled(observable.scale**2)
    caveats = _caveats(observable, spec)
    if sum_l2 == 0.0:
        if variance.value != 0.0:
            raise InconsistentConstantsError(
                f"{observable.label}: stored constants are all zero but the observed variance is {variance.value:.6g}"
            )
        ratio = EstimateWithCI.from_standard_error(
            0.0, 0.0, variance.sample_count, method=variance.method, seed=variance.seed
        )
        caveats.append(CAVEAT_DEGENERATE)
    else:
        ratio = root_variance.scaled(1.0 / root.sum_l2)
    return DevroyeReport(
        system=system.name,
        family=observable.label,
        eta=observable.eta,
        n=observable.arity,
        variance=variance,
        sum_l2=sum_l2,
        ratio=ratio,
        d_running=ratio.ci_high,
        caveats=tuple(caveats),
        seed=spec.master_seed,
    )


@dataclass(frozen=True)
class ObservableFamily:
    """A family indexed by window length ``n``, e.g. Birkhoff averages of one phi."""

    kind: str
    phi: Optional[PhiFunction] = None
    value: float = 0.0

    def __post_init__(self) -> None:
        kinds = (FAMILY_BIRKHOFF, FAMILY_PAIR, FAMILY_WEIGHTED_SUP, FAMILY_CONSTANT)
        if self.kind not in kinds:
            raise ParameterError(f"Unknown family '{self.kind}'. Available: {', '.join(kinds)}")
        if self.kind != FAMILY_CONSTANT and self.phi is None:
            raise ParameterError(f"family '{self.kind}' needs a phi")

    @property
    def name(self) -> str:
        return self.kind if self.phi is None else f"{self.kind}-{self.phi.name}"

    @property
    def eta(self) -> Optional[float]:
        return None if self.phi is None else self.phi.eta

    def build(self, n: int) -> SeparatelyHoelderObservable:
        if self.kind == FAMILY_BIRKHOFF:
            return make_birkhoff(self.phi, n)
        if self.kind == FAMILY_PAIR:
            return make_pair_correlation(self.phi, n)
        if self.kind == FAMILY_WEIGHTED_SUP:
            return make_weighted_sup(self.phi, [1.0 / n] * n)
        return make_constant(self.value, n)


@dataclass(frozen=True)
class ConstantSummary:
    d_running: float
    argmax_config: Optional[Dict[str, object]]
    monotonicity: Dict[str, List[Tuple[int, float]]]
    slopes: Dict[str, Optional[float]]
    grid: Dict[str, object] = field(default_factory=dict)
    seed: Optional[int] = None

    def to_record(self) -> Dict[str, object]:
        return {
            "D_running": self.d_running,
            "argmax_config": self.argmax_config,
            "grid": self.grid,
            "seed": self.seed,
            "monotonicity": {k: [[n, r] for n, r in v] for k, v in self.monotonicity.items()},
            "log_log_slopes": self.slopes,
        }


def log_log_slope(ns: Sequence[int], ratios: Sequence[float]) -> Optional[float]:
    """Slope of ``log ratio`` against ``log n``; None when fewer than two positive ratios."""

    points = [(math.log(n), math.log(r)) for n, r in zip(ns, ratios) if r > 0]
    if len(points) < 2 or len({x for x, _ in points}) < 2:
        return None
    xs, ys = zip(*points)
    slope, _ = np.polyfit(np.asarray(xs), np.asarray(ys), 1)
    return float(slope)


def estimate_constant_D(
    system: DynamicalSystem,
    families: Sequence[ObservableFamily],
    n_grid: Sequence[int],
    eta: float,
    spec: EnsembleSpec,
) -> Tuple[List[DevroyeReport], ConstantSummary]:
    """Run :func:`devroye_ratio` over ``families x n_grid`` in grid order."""

    if not families or not n_grid:
        raise ParameterError("families and n_grid must be nonempty")
    for family in families:
        if family.eta is not None and family.eta != eta:
            raise ParameterError(f"family '{family.name}' has exponent {family.eta}, requested eta={eta}")

    reports: List[DevroyeReport] = []
    running = 0.0
    argmax: Optional[Dict[str, object]] = None
    for family in families:
        for n in n_grid:
            report = devroye_ratio(family.build(n), system, spec)
            if argmax is None or report.ratio.ci_high > running:
                running = max(running, report.ratio.ci_high)
                argmax = {"family": family.name, "n": n}
            reports.append(replace(report, family=family.name, d_running=running))
            logger.info("%s %s n=%d ratio=%.6g", system.name, family.name, n, report.ratio.value)

    monotonicity = {
        family.name: [(r.n, r.ratio.value) for r in reports if r.family == family.name] for family in families
    }
    slopes = {name: log_log_slope([n for n, _ in rows], [v for _, v in rows]) for name, rows in monotonicity.items()}
    summary = ConstantSummary(
        d_running=running,
        argmax_config=argmax,
        monotonicity=monotonicity,
        slopes=slopes,
        grid={
            "system": system.name,
            "families": [family.name for family in families],
            "n": list(n_grid),
            "eta": eta,
            "sample_count": spec.sample_count,
        },
        seed=spec.master_seed,
    )
    return reports, summary
