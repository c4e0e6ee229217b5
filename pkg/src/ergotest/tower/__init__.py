"""Exact first-return towers for dyadic Markov interval maps."""
from .dyadic import format_dyadic, format_interval, from_digits, parse_interval
from .model import (
    TowerBranch,
    TowerModel,
    build_first_return_tower,
    kac_check,
    return_tail,
    return_tail_exact,
    tail_slope,
    tower_summary,
    write_branch_csv,
)
from .operator import level_masses, project_to_interval, tower_ulam
from .separation import (
    AtLeast,
    ContractionCheck,
    SymbolicPoint,
    TowerAxioms,
    atom,
    backward_contraction_check,
    check_tower_axioms,
    project,
    separation_time,
    tower_step,
)

__all__ = [
    "AtLeast",
    "ContractionCheck",
    "SymbolicPoint",
    "TowerAxioms",
    "TowerBranch",
    "TowerModel",
    "atom",
    "backward_contraction_check",
    "build_first_return_tower",
    "check_tower_axioms",
    "format_dyadic",
    "format_interval",
    "from_digits",
    "kac_check",
    "level_masses",
    "parse_interval",
    "project",
    "project_to_interval",
    "return_tail",
    "return_tail_exact",
    "separation_time",
    "tail_slope",
    "tower_step",
    "tower_summary",
    "tower_ulam",
    "write_branch_csv",
]
