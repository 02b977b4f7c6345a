from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np
import pandas as pd
from loguru import logger

from ..utils.config import AXES, DOMAINS
from ..utils.errors import IncompleteReportError, MissingColumnError, UndefinedCorrelationError
from .metrics import AggregatedScore, Level, ScoredRecord, aggregate, ktau, mse, pcc, srcc

REPORT_COLUMNS = ["domain", "axis", "mse", "lcc", "srcc", "ktau"]
METRICS = ("mse", "lcc", "srcc", "ktau")
POOLED_DOMAIN = "all"
UNDEFINED = "undefined"

ReportFormat = Literal["text", "csv"]


@dataclass
class MetricRow:
    domain: str
    axis: str
    mse: float
    lcc: float | None   # None marks an undefined correlation
    srcc: float | None
    ktau: float | None
    count: int = 0

    def value(self, metric: str) -> float | None:
        return getattr(self, metric)


@dataclass
class MetricReport:
    rows: list[MetricRow] = field(default_factory=list)
    level: str = "system"
    scale: str = "raw"

    def cell(self, domain: str, axis: str) -> MetricRow | None:
        for row in self.rows:
            if row.domain == domain and row.axis == axis:
                return row
        return None

    @property
    def pooled(self) -> bool:
        return bool(self.rows) and all(row.domain == POOLED_DOMAIN for row in self.rows)


def _correlation(fn, x, y) -> float | None:
    try:
        return fn(x, y)
    except UndefinedCorrelationError:
        return None


def _domain_order(domain: str) -> int:
    return DOMAINS.index(domain) if domain in DOMAINS else len(DOMAINS)


def _axis_order(axis: str) -> int:
    return AXES.index(axis) if axis in AXES else len(AXES)


def compute_report(records: list[ScoredRecord], level: Level = "system", pool_domains: bool = False,
                   scale: str = "raw") -> MetricReport:
    """
    Aggregate records at `level`, then compute MSE/LCC/SRCC/KTAU per
    (domain, axis) cell, or per axis over all domains when pool_domains is set.
    """
    scores: list[AggregatedScore] = aggregate(records, level)

    cells: dict[tuple[str, str], list[AggregatedScore]] = {}
    for score in scores:
        domain = POOLED_DOMAIN if pool_domains else score.domain
        cells.setdefault((domain, score.axis), []).append(score)

    rows = []
    for (domain, axis) in sorted(cells, key=lambda key: (_domain_order(key[0]), _axis_order(key[1]))):
        members = cells[(domain, axis)]
        predictions = np.array([m.prediction for m in members])
        gold = np.array([m.gold for m in members])
        rows.append(MetricRow(
            domain=domain,
            axis=axis,
            mse=mse(predictions, gold),
            lcc=_correlation(pcc, predictions, gold),
            srcc=_correlation(srcc, predictions, gold),
            ktau=_correlation(ktau, predictions, gold),
            count=len(members),
        ))
        undefined = [metric for metric in ("lcc", "srcc", "ktau") if rows[-1].value(metric) is None]
        if undefined:
            logger.warning(f"{domain}/{axis}: {', '.join(undefined)} undefined over {len(members)} groups")

    return MetricReport(rows=rows, level=level, scale=scale)


def _check_complete(report: MetricReport):
    if not report.rows:
        raise IncompleteReportError("Report has no rows")
    domains = sorted({row.domain for row in report.rows}, key=_domain_order)
    missing = [f"{domain}/{axis}" for domain in domains for axis in AXES if report.cell(domain, axis) is None]
    if missing:
        raise IncompleteReportError(f"Report is missing cell(s): {', '.join(missing)}")


def _format(value: float | None, precision: int) -> str:
    return UNDEFINED if value is None else f"{value:.{precision}f}"


def _ordered_rows(report: MetricReport) -> list[MetricRow]:
    return sorted(report.rows, key=lambda row: (_domain_order(row.domain), _axis_order(row.axis)))


def render_report(report: MetricReport, fmt: ReportFormat = "text") -> str:
    """
    Render a complete report.

    "text" is a fixed-width table (Domain, Axis, MSE, LCC, SRCC, KTAU) with
    4-decimal values and the domain printed once per block; "csv" uses the
    header domain,axis,mse,lcc,srcc,ktau with 6-decimal values.
    """
    _check_complete(report)
    rows = _ordered_rows(report)

    if fmt == "csv":
        frame = pd.DataFrame(
            [[row.domain, row.axis, *(_format(row.value(m), 6) for m in METRICS)] for row in rows],
            columns=REPORT_COLUMNS,
        )
        return frame.to_csv(index=False, lineterminator="\n")
    if fmt != "text":
        raise ValueError(f"Unknown report format {fmt!r}")

    title = f"{report.level.capitalize()}-level results (MSE on {report.scale} scale)"
    header = f"{'Domain':<8}{'Axis':<6}" + "".join(f"{m.upper():>10}" for m in METRICS)
    lines = [title, header, "-" * len(header)]
    previous_domain = None
    for row in rows:
        if previous_domain is not None and row.domain != previous_domain:
            lines.append("-" * len(header))
        label = row.domain.capitalize() if row.domain != previous_domain else ""
        lines.append(f"{label:<8}{row.axis:<6}" + "".join(f"{_format(row.value(m), 4):>10}" for m in METRICS))
        previous_domain = row.domain
    return "\n".join(lines) + "\n"


def read_report_csv(path: str | Path) -> MetricReport:
    """Load a machine-readable report written by render_report(..., "csv")."""
    frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    if list(frame.columns) != REPORT_COLUMNS:
        raise MissingColumnError(f"Report {path} must have header {','.join(REPORT_COLUMNS)}", line=1)

    def parse(text: str) -> float | None:
        return None if text == UNDEFINED else float(text)

    rows = [
        MetricRow(domain=row.domain, axis=row.axis, mse=float(row.mse),
                  lcc=parse(row.lcc), srcc=parse(row.srcc), ktau=parse(row.ktau))
        for row in frame.itertuples(index=False)
    ]
    return MetricReport(rows=rows)


def render_comparison(ours: MetricReport, baseline: MetricReport) -> str:
    """
    Axis x metric comparison of two domain-pooled reports.

    The best column shows ↓ when our MSE is lower and ↑ when our correlation
    is higher than the baseline's.
    """
    for report in (ours, baseline):
        if not report.pooled:
            raise IncompleteReportError("Comparison needs domain-pooled reports (domain 'all')")
        _check_complete(report)

    header = f"{'Axis':<6}{'Metric':<8}{'Baseline':>10}{'Ours':>10}{'Best':>6}"
    lines = [header, "-" * len(header)]
    for axis in AXES:
        mine = ours.cell(POOLED_DOMAIN, axis)
        theirs = baseline.cell(POOLED_DOMAIN, axis)
        for index, metric in enumerate(METRICS):
            our_value, their_value = mine.value(metric), theirs.value(metric)
            marker = ""
            if our_value is not None and their_value is not None:
                if metric == "mse" and our_value < their_value:
                    marker = "↓"
                elif metric != "mse" and our_value > their_value:
                    marker = "↑"
            label = axis if index == 0 else ""
            lines.append(f"{label:<6}{metric.upper():<8}{_format(their_value, 3):>10}"
                         f"{_format(our_value, 3):>10}{marker:>6}")
        lines.append("-" * len(header))
    return "\n".join(lines) + "\n"
