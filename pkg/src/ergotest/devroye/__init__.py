"""Empirical check of the variance inequality ``var(K) ≤ D sum_j L_j^2``."""
from .ratio import (
    CAVEAT_DEGENERATE,
    CAVEAT_ESTIMATED,
    CAVEAT_SRB,
    ConstantSummary,
    DevroyeReport,
    ObservableFamily,
    devroye_ratio,
    estimate_constant_D,
    log_log_slope,
)
from .report import CSV_COLUMNS, inequality_report, render_svg, report_rows, summary_payload

__all__ = [
    "CAVEAT_DEGENERATE",
    "CAVEAT_ESTIMATED",
    "CAVEAT_SRB",
    "CSV_COLUMNS",
    "ConstantSummary",
    "DevroyeReport",
    "ObservableFamily",
    "devroye_ratio",
    "estimate_constant_D",
    "inequality_report",
    "log_log_slope",
    "render_svg",
    "report_rows",
    "summary_payload",
]
