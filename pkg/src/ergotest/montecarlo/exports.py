"""Serialisation of estimates and correlation sequences."""
from __future__ import annotations

import csv
from pathlib import Path
from typing import Dict, List, Sequence

from ergotest.core.models import EstimateWithCI


def estimate_records(estimates: Sequence[EstimateWithCI]) -> List[Dict[str, object]]:
    return [estimate.to_record() for estimate in estimates]


def write_correlation_csv(estimates: Sequence[EstimateWithCI], path: Path) -> Path:
    """One row per lag: ``lag, value, std_error`` at full precision."""

    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["lag", "value", "std_error"])
        for lag, estimate in enumerate(estimates):
            writer.writerow([lag, format(estimate.value, ".17g"), format(estimate.std_error, ".17g")])
    return Path(path)
