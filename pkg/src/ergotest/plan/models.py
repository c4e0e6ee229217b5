"""Data models for run configurations."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional, Sequence, Tuple

COMMANDS = ("simulate", "density", "spectrum", "variance", "devroye", "tower", "correlations", "clt")
FORMATS = ("csv", "json", "svg")
MONTE_CARLO_COMMANDS = ("variance", "devroye", "correlations", "clt")


@dataclass(frozen=True)
class PhiConfig:
    """A catalog phi by name, or a user function by dotted path with its exponent and support."""

    name: Optional[str] = None
    callable: Optional[str] = None
    eta: float = 1.0
    support: Tuple[float, float] = (0.0, 1.0)


@dataclass(frozen=True)
class ObservableConfig:
    kind: str
    phi: Optional[PhiConfig] = None
    weights: Optional[Sequence[float]] = None
    value: float = 0.0

    @property
    def label(self) -> str:
        if self.phi is None:
            return self.kind
        return f"{self.kind}-{self.phi.name or self.phi.callable}"


@dataclass(frozen=True)
class RunConfig:
    command: str
    system: str
    params: Mapping[str, float] = field(default_factory=dict)
    families: Tuple[ObservableConfig, ...] = ()
    phi: Optional[PhiConfig] = None
    psi: Optional[PhiConfig] = None
    seed_state: Optional[Any] = None
    length: int = 1000
    steps: Optional[int] = None
    N: Optional[int] = None
    n: Optional[int] = None
    n_grid: Tuple[int, ...] = ()
    eta: Optional[float] = None
    lags: int = 10
    q_max: int = 30
    base: str = "0..1/2"
    bins_per_level: Optional[int] = None
    contraction_pairs: int = 1000
    sample_count: int = 10_000
    burn_in: Optional[int] = None
    seed_distribution: Optional[str] = None
    method: str = "iid-windows"
    master_seed: int = 0
    control: bool = False
    output_dir: Path = Path("ergotest-results")
    formats: Tuple[str, ...] = ("csv", "json")
    workers: int = 1
    # Canonical document (after overrides) used for artifact naming.
    document: Mapping[str, Any] = field(default_factory=dict, compare=False, repr=False)

    @property
    def observable(self) -> Optional[ObservableConfig]:
        return self.families[0] if self.families else None
