"""Resolution of user-supplied callables named by dotted path."""
from __future__ import annotations

from typing import Callable

from ergotest.utils import import_string

from .errors import CapabilityError


def resolve_callable(path: str) -> Callable:
    """Import ``module:attr`` and check the result is callable."""

    try:
        func = import_string(path)
    except (ImportError, AttributeError, ValueError) as exc:
        raise CapabilityError(f"Cannot resolve callable '{path}': {exc}") from exc
    if not callable(func):
        raise CapabilityError(f"Target '{path}' is not callable")
    return func
