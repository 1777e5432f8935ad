"""Report serialization: canonical JSON, flat CSV and a markdown summary."""

from __future__ import annotations

import csv
import io
import logging
import math
from pathlib import Path
from typing import Literal

from pydantic import ValidationError

from rhlab.config import get_settings
from rhlab.exceptions import ConfigError, ReportIoError
from rhlab.schemas.report import CheckReport, PointRecord, RunReport
from rhlab.services.audit import log_event

logger = logging.getLogger(__name__)

ReportFormat = Literal["json", "csv", "md"]

_SUFFIXES: dict[str, ReportFormat] = {
    ".json": "json",
    ".csv": "csv",
    ".md": "md",
    ".markdown": "md",
}


def format_for(path: Path) -> ReportFormat:
    """Infer the report format from a file suffix.

    Raises
    ------
    ConfigError
        If the suffix is not recognised.
    """
    try:
        return _SUFFIXES[path.suffix.lower()]
    except KeyError:
        raise ConfigError(
            f"cannot infer report format from {path.name!r}; "
            "use .json, .csv or .md",
            field="out",
        ) from None


def _judged_max(report: CheckReport, record: PointRecord) -> float | None:
    if record.status != "ok":
        return None
    keys = [key for key in report.tolerances if key in record.residuals]
    if not keys:
        keys = list(record.residuals)
    values = [record.residuals[key] for key in keys]
    return max(values) if values else None


def _worst(report: CheckReport) -> float | None:
    values = [report.values[key] for key in report.tolerances if key in report.values]
    if not values:
        return None
    if any(math.isnan(value) for value in values):
        return math.nan
    return max(values)


def to_json(report: RunReport) -> str:
    """Return the canonical JSON form of a report."""
    return report.model_dump_json(indent=2) + "\n"


def to_csv(report: RunReport) -> str:
    """Flatten per-point residuals into CSV text.

    Every record becomes one row with its coordinates, the ``instance:check``
    name and the largest judged residual at that point. Skipped and failed
    points keep their row with an empty residual. Checks without records
    contribute one row with empty coordinates.
    """
    width = max(
        (len(record.point) for check in report.checks for record in check.records),
        default=0,
    )
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow([*(f"x{i}" for i in range(width)), "check", "residual"])
    for check in report.checks:
        name = f"{check.instance}:{check.name}"
        if not check.records:
            worst = _worst(check)
            writer.writerow(
                [*([""] * width), name, "" if worst is None else repr(worst)]
            )
            continue
        for record in check.records:
            coords = [repr(v) for v in record.point]
            coords += [""] * (width - len(coords))
            residual = _judged_max(check, record)
            writer.writerow([*coords, name, "" if residual is None else repr(residual)])
    return buffer.getvalue()


def to_markdown(report: RunReport) -> str:
    """Render a verdict table, one row per check."""
    name = report.scenario.get("name", "scenario")
    lines = [
        f"# {name}",
        "",
        f"Overall: **{report.verdict}** (version {report.meta.version}, "
        f"seed {report.meta.seed}, {report.meta.samples} samples)",
        "",
        "| instance | check | verdict | expected | max residual |",
        "| --- | --- | --- | --- | --- |",
    ]
    for check in report.checks:
        worst = _worst(check)
        shown = "n/a" if worst is None else f"{worst:.3e}"
        verdict = check.verdict if check.error is None else f"{check.verdict} (error)"
        lines.append(
            f"| {check.instance} | {check.name} | {verdict} | {check.expected} "
            f"| {shown} |"
        )
    errors = [check for check in report.checks if check.error]
    if errors:
        lines += ["", "## Errors", ""]
        lines += [f"- `{check.key}`: {check.error}" for check in errors]
    return "\n".join(lines) + "\n"


_RENDERERS = {"json": to_json, "csv": to_csv, "md": to_markdown}


def render(report: RunReport, fmt: ReportFormat) -> bytes:
    """Serialize a report in the given format."""
    return _RENDERERS[fmt](report).encode("utf-8")


def resolve_path(path: str | Path) -> Path:
    """Resolve relative report paths against the configured report directory."""
    path = Path(path)
    return path if path.is_absolute() else get_settings().report_dir / path


def write_report(report: RunReport, fmt: ReportFormat, path: str | Path) -> Path:
    """Write a report file.

    Parameters
    ----------
    report : RunReport
        Report to write.
    fmt : {"json", "csv", "md"}
        Output format.
    path : str | Path
        Destination, relative paths resolve against ``report_dir``.

    Returns
    -------
    Path
        Path written.

    Raises
    ------
    ReportIoError
        If the file cannot be written.
    """
    target = resolve_path(path)
    data = render(report, fmt)
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_bytes(data)
    except OSError as exc:
        raise ReportIoError(f"cannot write report {target}: {exc}") from exc
    log_event(
        action="report.written",
        resource_type="report",
        resource_id=str(target),
        metadata={"format": fmt, "bytes": len(data)},
    )
    return target


def load_report(path: str | Path) -> RunReport:
    """Read a JSON report back.

    Raises
    ------
    ReportIoError
        If the file cannot be read or is not a valid report.
    """
    target = Path(path)
    try:
        return RunReport.model_validate_json(target.read_bytes())
    except OSError as exc:
        raise ReportIoError(f"cannot read report {target}: {exc}") from exc
    except ValidationError as exc:
        raise ReportIoError(f"{target} is not a run report: {exc}") from exc
