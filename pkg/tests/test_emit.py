"""Tests for report serialization."""

from __future__ import annotations

import csv
import io
from pathlib import Path

import pytest

from rhlab.exceptions import ConfigError, ReportIoError
from rhlab.schemas.report import (
    CheckReport,
    InstancePoints,
    PointRecord,
    RunMeta,
    RunReport,
    RunTiming,
)
from rhlab.services import emit


@pytest.fixture
def report() -> RunReport:
    """Return a small hand-built report with one pointwise and one failed check."""
    pointwise = CheckReport(
        name="rh_residual",
        instance="sphere",
        kind="catalog",
        records=[
            PointRecord(point=[0.5, 1.0], residuals={"rh_residual": 1e-12}),
            PointRecord(point=[1.5, 2.0], residuals={"rh_residual": 3e-12}),
            PointRecord(point=[2.5, 3.0], status="skipped", error="critical"),
        ],
        values={"rh_residual": 3e-12},
        tolerances={"rh_residual": 1e-8},
        verdicts={"rh_residual": "pass"},
        verdict="pass",
        matched=True,
    )
    failed = CheckReport(
        name="extension",
        instance="extension_m1",
        kind="extension",
        values={"res_ric": 0.5},
        tolerances={"res_ric": 1e-10},
        verdicts={"res_ric": "fail"},
        verdict="fail",
        matched=False,
        error="ZeroSymmetricPart: symmetric part of the derivation vanishes",
    )
    return RunReport(
        scenario={"name": "tiny"},
        checks=[pointwise, failed],
        points=[InstancePoints(instance="sphere", points=[[0.5, 1.0], [1.5, 2.0]])],
        residuals={c.key: dict(c.values) for c in (pointwise, failed)},
        verdicts={c.key: c.verdict for c in (pointwise, failed)},
        verdict="fail",
        meta=RunMeta(
            version="0.1.0",
            seed=0,
            samples=3,
            timing=RunTiming(timestamp="2026-01-01T00:00:00+00:00", wall_time=0.1),
        ),
    )


class TestFormats:
    """Rendering in each format."""

    @pytest.mark.parametrize(
        ("name", "fmt"),
        [("a.json", "json"), ("b.CSV", "csv"), ("c.md", "md"), ("d.markdown", "md")],
    )
    def test_format_for(self, name: str, fmt: str) -> None:
        """Infer formats from suffixes.

        Parameters
        ----------
        name : str
            File name.
        fmt : str
            Expected format.

        Returns
        -------
        None
            Asserts the suffix maps to the format.
        """
        assert emit.format_for(Path(name)) == fmt

    def test_unknown_suffix(self) -> None:
        """Ask for a format that does not exist.

        Returns
        -------
        None
            Asserts a ConfigError on ``out`` is raised.
        """
        with pytest.raises(ConfigError) as info:
            emit.format_for(Path("report.xlsx"))
        assert info.value.field == "out"

    def test_csv_rows(self, report: RunReport) -> None:
        """Flatten a report.

        Parameters
        ----------
        report : RunReport
            Report fixture.

        Returns
        -------
        None
            Asserts one row per record plus one per record-less check.
        """
        rows = list(csv.reader(io.StringIO(emit.to_csv(report))))
        assert rows[0] == ["x0", "x1", "check", "residual"]
        assert len(rows) == 1 + 3 + 1
        assert rows[1] == ["0.5", "1.0", "sphere:rh_residual", "1e-12"]
        assert rows[3][-1] == ""
        assert rows[4] == ["", "", "extension_m1:extension", "0.5"]

    def test_markdown_table(self, report: RunReport) -> None:
        """Summarize a report.

        Parameters
        ----------
        report : RunReport
            Report fixture.

        Returns
        -------
        None
            Asserts header, separator and one row per check, then errors.
        """
        text = emit.to_markdown(report)
        rows = [line for line in text.splitlines() if line.startswith("| ")]
        assert len(rows) == 2 + 2
        assert "| sphere | rh_residual | pass | pass | 3.000e-12 |" in rows
        assert "fail (error)" in rows[3]
        assert "## Errors" in text
        assert text.startswith("# tiny\n")


class TestFiles:
    """Writing and reading report files."""

    def test_json_roundtrip(self, report: RunReport) -> None:
        """Write and reload a JSON report.

        Parameters
        ----------
        report : RunReport
            Report fixture.

        Returns
        -------
        None
            Asserts the reloaded report serializes to the same bytes.
        """
        path = emit.write_report(report, "json", "nested/out.json")
        assert path.parent.name == "nested"
        loaded = emit.load_report(path)
        assert emit.render(loaded, "json") == path.read_bytes()
        assert loaded == report

    def test_relative_paths_use_report_dir(self, tmp_path: Path) -> None:
        """Resolve a relative report path.

        Parameters
        ----------
        tmp_path : Path
            Report directory set by the autouse fixture.

        Returns
        -------
        None
            Asserts relative paths land in the report directory.
        """
        assert emit.resolve_path("r.md") == tmp_path / "r.md"
        assert emit.resolve_path(tmp_path / "abs.md") == tmp_path / "abs.md"

    def test_not_a_report(self, tmp_path: Path) -> None:
        """Load a JSON file that is not a report.

        Parameters
        ----------
        tmp_path : Path
            Temporary directory.

        Returns
        -------
        None
            Asserts ReportIoError is raised for bad and missing files.
        """
        path = tmp_path / "bogus.json"
        path.write_text('{"verdict": "maybe"}', encoding="utf-8")
        with pytest.raises(ReportIoError):
            emit.load_report(path)
        with pytest.raises(ReportIoError):
            emit.load_report(tmp_path / "absent.json")
