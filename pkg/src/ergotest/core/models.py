"""Core dataclasses shared across ergotest subsystems."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Any, Dict, Optional

# Two-sided 95% normal quantile used for every reported interval.
Z_95 = 1.96

METHOD_IID = "iid-windows"
METHOD_BATCH = "batch-means"
METHOD_EXACT = "exact"


@dataclass(frozen=True)
class EstimateWithCI:
    """A point estimate with its standard error and 95% normal interval."""

    value: float
    std_error: float
    ci_low: float
    ci_high: float
    sample_count: int
    method: str = METHOD_IID
    seed: Optional[int] = None
    discarded: int = 0

    @classmethod
    def from_standard_error(
        cls,
        value: float,
        std_error: float,
        sample_count: int,
        *,
        method: str = METHOD_IID,
        seed: Optional[int] = None,
        discarded: int = 0,
    ) -> "EstimateWithCI":
        if not math.isfinite(std_error) or std_error < 0:
            raise ValueError(f"standard error must be finite and non-negative, got {std_error}")
        half = Z_95 * std_error
        return cls(
            value=float(value),
            std_error=float(std_error),
            ci_low=float(value) - half,
            ci_high=float(value) + half,
            sample_count=int(sample_count),
            method=method,
            seed=seed,
            discarded=int(discarded),
        )

    def scaled(self, factor: float) -> "EstimateWithCI":
        """Return the estimate of ``factor * quantity`` (``factor`` > 0)."""

        if factor < 0:
            raise ValueError("scaling factor must be non-negative")
        return replace(
            self,
            value=self.value * factor,
            std_error=self.std_error * factor,
            ci_low=self.ci_low * factor,
            ci_high=self.ci_high * factor,
        )

    def covers(self, target: float, k: float = 3.0) -> bool:
        """True when ``target`` lies within ``k`` standard errors of the estimate."""

        return abs(self.value - target) <= k * self.std_error

    def to_record(self) -> Dict[str, Any]:
        return {
            "value": self.value,
            "std_error": self.std_error,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "n_samples": self.sample_count,
            "method": self.method,
            "seed": self.seed,
        }


ESTIMATE_SCHEMA = {
    "type": "object",
    "required": ["value", "std_error", "ci_low", "ci_high", "n_samples", "method", "seed"],
    "properties": {
        "value": {"type": "number"},
        "std_error": {"type": "number", "minimum": 0},
        "ci_low": {"type": "number"},
        "ci_high": {"type": "number"},
        "n_samples": {"type": "integer", "minimum": 0},
        "method": {"type": "string", "enum": [METHOD_IID, METHOD_BATCH, METHOD_EXACT]},
        "seed": {"type": ["integer", "null"]},
    },
}
