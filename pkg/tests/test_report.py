import pytest

from aesanet.evaluation.metrics import ScoredRecord
from aesanet.evaluation.report import (
    MetricReport,
    MetricRow,
    compute_report,
    read_report_csv,
    render_comparison,
    render_report,
)
from aesanet.utils.config import AXES, DOMAINS
from aesanet.utils.errors import IncompleteReportError


def table_fixture() -> MetricReport:
    rows = []
    for d, domain in enumerate(DOMAINS):
        for a, axis in enumerate(AXES):
            rows.append(MetricRow(domain=domain, axis=axis, mse=0.1 * (d + 1) + 0.01 * a,
                                  lcc=0.6 + 0.01 * a, srcc=0.7, ktau=0.5))
    rows[0] = MetricRow("speech", "PQ", mse=0.5138, lcc=0.6950, srcc=0.7182, ktau=0.4909)
    return MetricReport(rows=rows, level="system", scale="raw 1-10")


def records_for(predict):
    records = []
    for domain in DOMAINS:
        for system in range(4):
            for axis in AXES:
                gold = 2.0 + system + 0.5 * AXES.index(axis)
                records.append(ScoredRecord(f"{domain}-{system}-{axis}", f"{domain}{system}", domain, axis,
                                            prediction=predict(gold), gold=gold))
    return records


class TestRender:
    def test_table_layout(self):
        lines = render_report(table_fixture(), "text").splitlines()
        assert lines[1].split() == ["Domain", "Axis", "MSE", "LCC", "SRCC", "KTAU"]
        body = [line for line in lines[3:] if not set(line) <= {"-"}]
        assert len(body) == 12
        assert body[0].split() == ["Speech", "PQ", "0.5138", "0.6950", "0.7182", "0.4909"]
        assert body[1].split()[0] == "PC"
        assert body[4].split()[:2] == ["Music", "PQ"]
        assert body[8].split()[:2] == ["Audio", "PQ"]

    def test_csv_layout(self):
        text = render_report(table_fixture(), "csv")
        lines = text.splitlines()
        assert lines[0] == "domain,axis,mse,lcc,srcc,ktau"
        assert lines[1] == "speech,PQ,0.513800,0.695000,0.718200,0.490900"
        assert len(lines) == 13

    def test_undefined_cells(self):
        report = table_fixture()
        report.rows[0].lcc = None
        assert "undefined" in render_report(report, "text").splitlines()[3]
        assert render_report(report, "csv").splitlines()[1].split(",")[3] == "undefined"

    def test_empty_report(self):
        with pytest.raises(IncompleteReportError):
            render_report(MetricReport(), "text")

    def test_missing_cell(self):
        report = table_fixture()
        report.rows.pop(5)
        with pytest.raises(IncompleteReportError, match="music/PC"):
            render_report(report, "csv")

    def test_csv_round_trip(self, tmp_path):
        path = tmp_path / "report.csv"
        path.write_text(render_report(table_fixture(), "csv"))
        loaded = read_report_csv(path)
        assert loaded.cell("speech", "PQ").mse == pytest.approx(0.5138)
        assert len(loaded.rows) == 12


class TestCompute:
    def test_perfect_predictions(self):
        report = compute_report(records_for(lambda gold: gold), level="system")
        assert len(report.rows) == 12
        for row in report.rows:
            assert row.mse == 0.0
            assert row.lcc == pytest.approx(1.0)
            assert row.srcc == pytest.approx(1.0)
            assert row.ktau == pytest.approx(1.0)

    def test_reversed_ranks(self):
        report = compute_report(records_for(lambda gold: 20.0 - gold), level="utterance")
        assert all(row.srcc == pytest.approx(-1.0) for row in report.rows)

    def test_pooled_report_and_comparison(self):
        ours = compute_report(records_for(lambda gold: gold + 0.1), pool_domains=True)
        baseline = compute_report(records_for(lambda gold: gold + 0.5), pool_domains=True)
        assert ours.pooled and [row.axis for row in ours.rows] == list(AXES)
        assert all(row.count == 12 for row in ours.rows)

        table = render_comparison(ours, baseline)
        mse_lines = [line for line in table.splitlines() if "MSE" in line]
        assert len(mse_lines) == 4
        assert all(line.rstrip().endswith("↓") for line in mse_lines)

    def test_comparison_needs_pooled(self):
        with pytest.raises(IncompleteReportError):
            render_comparison(table_fixture(), table_fixture())
