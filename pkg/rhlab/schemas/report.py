"""Run report schemas."""

from __future__ import annotations

from typing import Any, Literal

from pydantic import Field

from rhlab.schemas.common import APIModel, Verdict

PointStatus = Literal["ok", "skipped", "error"]


class PointRecord(APIModel):
    """Named residuals at one sample point.

    ``skipped`` marks points where a check is undefined (critical points,
    excluded probes); ``error`` marks evaluation failures.
    """

    point: list[float]
    residuals: dict[str, float] = Field(default_factory=dict)
    status: PointStatus = "ok"
    error: str | None = None


class CheckReport(APIModel):
    """Outcome of one check on one instance.

    Attributes
    ----------
    name : str
        Check name.
    instance : str
        Instance label.
    kind : str
        Instance kind.
    records : list[PointRecord]
        Per-point residuals; empty for checks on profiles and matrices.
    values : dict[str, float]
        Summary values, worst case over points for pointwise residuals.
    tolerances : dict[str, float]
        Tolerances applied to the judged values.
    verdicts : dict[str, Verdict]
        Verdict per judged value.
    verdict : Verdict
        Overall check verdict.
    expected : Verdict
        Documented expectation.
    matched : bool
        Whether ``verdict == expected``.
    error : str | None
        Error that stopped the check.
    """

    name: str
    instance: str
    kind: str
    records: list[PointRecord] = Field(default_factory=list)
    values: dict[str, float] = Field(default_factory=dict)
    tolerances: dict[str, float] = Field(default_factory=dict)
    verdicts: dict[str, Verdict] = Field(default_factory=dict)
    verdict: Verdict
    expected: Verdict = "pass"
    matched: bool
    error: str | None = None

    @property
    def key(self) -> str:
        """Return ``instance/check``."""
        return f"{self.instance}/{self.name}"


class InstancePoints(APIModel):
    """Sample points used for one instance."""

    instance: str
    points: list[list[float]] = Field(default_factory=list)


class RunTiming(APIModel):
    """Run timing, the only nondeterministic part of a report."""

    timestamp: str
    wall_time: float


class RunMeta(APIModel):
    """Provenance stamp."""

    version: str
    seed: int
    samples: int
    timing: RunTiming


class RunReport(APIModel):
    """Everything a scenario run produced.

    Attributes
    ----------
    scenario : dict[str, Any]
        Echo of the validated scenario.
    checks : list[CheckReport]
        Check reports in instance then check order.
    points : list[InstancePoints]
        Sample points per instance.
    residuals : dict[str, dict[str, float]]
        Summary values keyed by ``instance/check``.
    verdicts : dict[str, Verdict]
        Check verdicts keyed by ``instance/check``.
    verdict : Verdict
        ``pass`` when every check matched its expectation.
    meta : RunMeta
        Version, seed and timing.
    """

    scenario: dict[str, Any]
    checks: list[CheckReport]
    points: list[InstancePoints] = Field(default_factory=list)
    residuals: dict[str, dict[str, float]] = Field(default_factory=dict)
    verdicts: dict[str, Verdict] = Field(default_factory=dict)
    verdict: Verdict
    meta: RunMeta

    def deterministic_dump(self) -> dict[str, Any]:
        """Return the report as JSON data without the timing block."""
        data = self.model_dump(mode="json")
        data["meta"].pop("timing", None)
        return data
