"""CSV, JSON and SVG artifacts for Devroye ratio sweeps."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence
from xml.sax.saxutils import escape

from jsonschema import Draft7Validator

from ergotest.core.errors import PreconditionError

from .ratio import ConstantSummary, DevroyeReport

CSV_COLUMNS = (
    "system",
    "family",
    "eta",
    "n",
    "variance",
    "variance_se",
    "sum_L2",
    "ratio",
    "ratio_ci_low",
    "ratio_ci_high",
    "caveats",
)

SUMMARY_SCHEMA = {
    "type": "object",
    "required": ["D_running", "argmax_config", "grid", "seed"],
    "properties": {
        "D_running": {"type": "number"},
        "argmax_config": {"type": ["object", "null"]},
        "grid": {"type": "object"},
        "seed": {"type": ["integer", "null"]},
    },
}

SERIES_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def report_rows(reports: Sequence[DevroyeReport]) -> List[List[str]]:
    return [
        [
            r.system,
            r.family,
            _fmt(r.eta),
            str(r.n),
            _fmt(r.variance.value),
            _fmt(r.variance.std_error),
            _fmt(r.sum_l2),
            _fmt(r.ratio.value),
            _fmt(r.ratio.ci_low),
            _fmt(r.ratio.ci_high),
            ";".join(r.caveats),
        ]
        for r in reports
    ]


def summary_payload(reports: Sequence[DevroyeReport], summary: Optional[ConstantSummary]) -> Dict[str, object]:
    if summary is not None:
        return summary.to_record()
    best = max(reports, key=lambda r: r.ratio.ci_high)
    return {
        "D_running": max(r.ratio.ci_high for r in reports),
        "argmax_config": {"family": best.family, "n": best.n},
        "grid": {
            "system": sorted({r.system for r in reports}),
            "families": sorted({r.family for r in reports}),
            "n": sorted({r.n for r in reports}),
        },
        "seed": reports[0].seed,
    }


def render_svg(reports: Sequence[DevroyeReport], *, width: int = 640, height: int = 400) -> str:
    """Ratio against ``log10 n``: one polyline per family, no timestamp."""

    families: Dict[str, List[DevroyeReport]] = {}
    for report in reports:
        families.setdefault(report.family, []).append(report)
    xs = [math.log10(r.n) for r in reports]
    ys = [r.ratio.value for r in reports]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(0.0, min(ys)), max(ys)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    margin = 50

    def px(x: float) -> float:
        return margin + (x - x_lo) / (x_hi - x_lo) * (width - 2 * margin)

    def py(y: float) -> float:
        return height - margin - (y - y_lo) / (y_hi - y_lo) * (height - 2 * margin)

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" y2="{height - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" stroke="black"/>',
        f'<text x="{width / 2:.1f}" y="{height - 10}" text-anchor="middle">log10 n</text>',
        f'<text x="15" y="{height / 2:.1f}" transform="rotate(-90 15 {height / 2:.1f})" text-anchor="middle">ratio</text>',
        f'<text x="{margin - 5}" y="{py(y_lo):.1f}" text-anchor="end" font-size="10">{y_lo:.4g}</text>',
        f'<text x="{margin - 5}" y="{py(y_hi):.1f}" text-anchor="end" font-size="10">{y_hi:.4g}</text>',
    ]
    for k, (family, rows) in enumerate(families.items()):
        rows = sorted(rows, key=lambda r: r.n)
        color = SERIES_COLORS[k % len(SERIES_COLORS)]
        points = " ".join(f"{px(math.log10(r.n)):.2f},{py(r.ratio.value):.2f}" for r in rows)
        lines.append(f'<polyline class="series" fill="none" stroke="{color}" points="{points}"/>')
        lines.append(
            f'<text x="{width - margin + 5}" y="{margin + 15 * k}" fill="{color}" font-size="10">{escape(family)}</text>'
        )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def inequality_report(
    reports: Sequence[DevroyeReport],
    stem: Path,
    *,
    formats: Sequence[str] = ("csv", "json"),
    summary: Optional[ConstantSummary] = None,
) -> Mapping[str, Path]:
    """Write ``<stem>.csv`` (one row per report), ``<stem>.json`` and optionally ``<stem>.svg``."""

    if not reports:
        raise PreconditionError("inequality_report needs at least one report")
    stem = Path(stem)
    written: Dict[str, Path] = {}
    if "csv" in formats:
        path = stem.with_suffix(".csv")
        with path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            writer.writerows(report_rows(reports))
        written["csv"] = path
    if "json" in formats:
        payload = summary_payload(reports, summary)
        Draft7Validator(SUMMARY_SCHEMA).validate(payload)
        path = stem.with_suffix(".json")
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        written["json"] = path
    if "svg" in formats:
        path = stem.with_suffix(".svg")
        path.write_text(render_svg(reports), encoding="utf-8")
        written["svg"] = path
    return written
