"""Run-configuration loader and executor behind the ``ergotest`` command."""

from .loader import load_config, validate
from .models import COMMANDS, FORMATS, ObservableConfig, PhiConfig, RunConfig
from .runner import EXIT_COMPUTATIONAL, EXIT_INVALID, EXIT_OK, config_digest, run

__all__ = [
    "COMMANDS",
    "EXIT_COMPUTATIONAL",
    "EXIT_INVALID",
    "EXIT_OK",
    "FORMATS",
    "ObservableConfig",
    "PhiConfig",
    "RunConfig",
    "config_digest",
    "load_config",
    "run",
    "validate",
]
