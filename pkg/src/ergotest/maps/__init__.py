"""Catalog of dynamical systems and orbit operations."""
from .catalog import (
    BUILTIN_SYSTEM_CLASSES,
    DynamicalSystem,
    LinearBranch,
    MonotoneBranch,
    available_systems,
    make_system,
    register_system,
    system_class,
)
from .dynamics import Trajectory, evolve, lyapunov_spectrum, orbit, uniform_sampler

__all__ = [
    "BUILTIN_SYSTEM_CLASSES",
    "DynamicalSystem",
    "LinearBranch",
    "MonotoneBranch",
    "Trajectory",
    "available_systems",
    "evolve",
    "lyapunov_spectrum",
    "make_system",
    "orbit",
    "register_system",
    "system_class",
    "uniform_sampler",
]
