"""Official metrics, aggregation, reports and embedding diagnostics."""

from .embedding import EmbeddingGap, collect_embeddings, embedding_gap
from .metrics import AggregatedScore, ScoredRecord, aggregate, ktau, mse, pcc, srcc
from .report import (
    REPORT_COLUMNS,
    MetricReport,
    MetricRow,
    compute_report,
    read_report_csv,
    render_comparison,
    render_report,
)

__all__ = [
    "REPORT_COLUMNS",
    "AggregatedScore",
    "EmbeddingGap",
    "MetricReport",
    "MetricRow",
    "ScoredRecord",
    "aggregate",
    "collect_embeddings",
    "compute_report",
    "embedding_gap",
    "ktau",
    "mse",
    "pcc",
    "read_report_csv",
    "render_comparison",
    "render_report",
    "srcc",
]
