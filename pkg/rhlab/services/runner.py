"""Scenario loading and execution."""

from __future__ import annotations

import logging
import re
import time
import tomllib
from collections.abc import Mapping, Sequence
from dataclasses import replace
from datetime import UTC, datetime
from functools import partial
from pathlib import Path
from typing import Any

import anyio
import anyio.to_thread
import numpy as np
from numpy.typing import NDArray
from pydantic import ValidationError

from rhlab import __version__
from rhlab.config import get_settings
from rhlab.exceptions import ConfigError, PreconditionViolated, RicciHessianError
from rhlab.geometry.fields import ChartDomain
from rhlab.schemas.common import Verdict, verdict_of
from rhlab.schemas.report import (
    CheckReport,
    InstancePoints,
    PointRecord,
    RunMeta,
    RunReport,
    RunTiming,
)
from rhlab.schemas.scenario import InstanceSpec, SampleSpec, Scenario
from rhlab.services.audit import log_event
from rhlab.services.checks import (
    CHECKS,
    POINT_ERRORS,
    Check,
    CheckContext,
    evaluate_point,
    judge,
    resolve_tolerances,
    worst_values,
)
from rhlab.services.instances import BuiltInstance, build_instance
from rhlab.services.sampling import sample_points

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]

_TOML_POSITION = re.compile(r"line (\d+)")


def _line_of(text: str, loc: Sequence[Any]) -> int | None:
    keys = [part for part in loc if isinstance(part, str)]
    for key in reversed(keys):
        pattern = re.compile(rf"^\s*(\[+\s*)?{re.escape(key)}\s*(=|\])", re.MULTILINE)
        match = pattern.search(text)
        if match is not None:
            return text.count("\n", 0, match.start()) + 1
    return None


def parse_scenario(text: str, source: str = "<scenario>") -> Scenario:
    """Parse and validate scenario TOML.

    Parameters
    ----------
    text : str
        TOML document.
    source : str, default="<scenario>"
        Name used in diagnostics.

    Returns
    -------
    Scenario
        Validated scenario.

    Raises
    ------
    ConfigError
        If the document is not valid TOML or does not match the schema.
    """
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        match = _TOML_POSITION.search(str(exc))
        line = int(match.group(1)) if match else None
        raise ConfigError(f"{source}: {exc}", line=line) from exc
    try:
        scenario = Scenario.model_validate(data)
    except ValidationError as exc:
        error = exc.errors()[0]
        loc = error["loc"]
        field = ".".join(str(part) for part in loc)
        raise ConfigError(
            f"{source}: {field}: {error['msg']}", field=field, line=_line_of(text, loc)
        ) from exc
    validate_scenario(scenario)
    return scenario


def load_scenario(path: Path) -> Scenario:
    """Read and validate a scenario file.

    Raises
    ------
    ConfigError
        If the file cannot be read or is invalid.
    """
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read scenario {path}: {exc}") from exc
    return parse_scenario(text, str(path))


def validate_scenario(scenario: Scenario) -> None:
    """Resolve check names and check that every key refers to a check.

    Raises
    ------
    ConfigError
        If a check is unknown or applies to none of the instances, or a
        tolerance, option or expectation key names no requested check.
    """
    kinds = {spec.kind for spec in scenario.instances}
    for name in scenario.checks:
        check = CHECKS.get(name)
        if check is None:
            raise ConfigError(f"unknown check {name!r}", field="checks")
        if not kinds & check.kinds:
            raise ConfigError(
                f"check {name!r} applies to {sorted(check.kinds)} instances",
                field="checks",
            )
    requested = set(scenario.checks)
    keyed = (
        ("tolerances", [key.split(".", 1)[0] for key in scenario.tolerances]),
        ("options", list(scenario.options)),
        ("expect", list(scenario.expect)),
    )
    for section, names in keyed:
        for name in names:
            if name not in requested:
                raise ConfigError(
                    f"{section} refers to {name!r}, which is not a requested check",
                    field=f"{section}.{name}",
                )
    for index, spec in enumerate(scenario.instances):
        for section in ("expect", "options"):
            for name in getattr(spec, section):
                if name not in requested:
                    raise ConfigError(
                        f"instance {index} {section} refers to {name!r}, "
                        "which is not a requested check",
                        field=f"instances.{index}.{section}.{name}",
                    )


def apply_overrides(
    scenario: Scenario,
    *,
    seed: int | None = None,
    samples: int | None = None,
    tolerances: Mapping[str, float] | None = None,
) -> Scenario:
    """Return the scenario with command-line overrides applied.

    Raises
    ------
    ConfigError
        If an override is out of range or names no requested check.
    """
    sample_data = scenario.samples.model_dump()
    if seed is not None:
        sample_data["seed"] = seed
    if samples is not None:
        sample_data["count"] = samples
    try:
        sample_spec = SampleSpec.model_validate(sample_data)
    except ValidationError as exc:
        error = exc.errors()[0]
        field = "samples." + ".".join(str(part) for part in error["loc"])
        raise ConfigError(f"{field}: {error['msg']}", field=field) from exc
    merged = {**scenario.tolerances, **(tolerances or {})}
    for key, value in merged.items():
        if not value > 0.0:
            raise ConfigError(f"tolerance {key!r} must be positive", field=key)
    updated = scenario.model_copy(update={"samples": sample_spec, "tolerances": merged})
    validate_scenario(updated)
    return updated


def _inset(domain: ChartDomain, margin: float) -> ChartDomain:
    if margin == 0.0:
        return domain
    lower = np.asarray(domain.lower)
    upper = np.asarray(domain.upper)
    span = upper - lower
    return replace(
        domain,
        lower=tuple(float(v) for v in lower + margin * span),
        upper=tuple(float(v) for v in upper - margin * span),
    )


def _expected(
    name: str, spec: InstanceSpec, built_expected: Mapping[str, str], scenario: Scenario
) -> Verdict:
    for source in (spec.expect, scenario.expect, built_expected):
        if name in source:
            return "fail" if source[name] == "fail" else "pass"
    return "pass"


def _report(
    check: Check,
    label: str,
    kind: str,
    expected: Verdict,
    *,
    records: list[PointRecord] | None = None,
    values: dict[str, float] | None = None,
    overrides: Mapping[str, float],
    error: str | None = None,
) -> CheckReport:
    values = values or {}
    tolerances = resolve_tolerances(check, values, overrides)
    verdicts = judge(values, tolerances)
    passed = error is None and all(v == "pass" for v in verdicts.values())
    verdict = verdict_of(passed)
    report = CheckReport(
        name=check.name,
        instance=label,
        kind=kind,
        records=records or [],
        values=values,
        tolerances=tolerances,
        verdicts=verdicts,
        verdict=verdict,
        expected=expected,
        matched=verdict == expected,
        error=error,
    )
    log_event(
        action="check.completed",
        resource_type="check",
        resource_id=report.key,
        metadata={
            "verdict": verdict,
            "expected": expected,
            "matched": report.matched,
            "error": error,
        },
        level=logging.INFO if report.matched else logging.WARNING,
    )
    return report


async def map_points(
    fn: Any, points: Sequence[FloatArray], limiter: anyio.CapacityLimiter
) -> list[PointRecord]:
    """Evaluate ``fn`` at every point on worker threads.

    Results are stored by index, so the returned order is the point order.
    """
    results: list[PointRecord | None] = [None] * len(points)

    async def evaluate(index: int, point: FloatArray) -> None:
        results[index] = await anyio.to_thread.run_sync(
            evaluate_point, fn, point, limiter=limiter
        )

    async with anyio.create_task_group() as group:
        for index, point in enumerate(points):
            group.start_soon(evaluate, index, point)
    return [record for record in results if record is not None]


def _point_error(records: Sequence[PointRecord]) -> str | None:
    failed = [record for record in records if record.status == "error"]
    if failed:
        return f"{len(failed)} of {len(records)} points failed: {failed[0].error}"
    if records and not any(record.status == "ok" for record in records):
        return "no sample point could be evaluated"
    return None


async def _run_check(
    check: Check,
    spec: InstanceSpec,
    built: BuiltInstance,
    points: list[FloatArray],
    scenario: Scenario,
    expected: Verdict,
    limiter: anyio.CapacityLimiter,
) -> CheckReport:
    options = {
        **scenario.options.get(check.name, {}),
        **spec.options.get(check.name, {}),
    }
    ctx = CheckContext(built, points, options, scenario.samples.seed)
    finish = partial(
        _report, check, built.label, built.kind, expected, overrides=scenario.tolerances
    )
    try:
        if check.point is not None:
            if not points:
                raise PreconditionViolated(f"{built.label} has no sample points")
            if check.prepare is not None:
                extra = await anyio.to_thread.run_sync(
                    check.prepare, ctx, limiter=limiter
                )
                ctx = replace(ctx, options={**options, **extra})
            records = await map_points(partial(check.point, ctx), points, limiter)
            values = worst_values(records)
        elif check.aggregate is not None:
            outcome = await anyio.to_thread.run_sync(
                check.aggregate, ctx, limiter=limiter
            )
            records, values = outcome.records, outcome.values
        else:
            raise PreconditionViolated(f"check {check.name} has nothing to run")
    except POINT_ERRORS as exc:
        return finish(error=f"{type(exc).__name__}: {exc}")
    return finish(records=records, values=values, error=_point_error(records))


def _applicable(scenario: Scenario, kind: str) -> list[Check]:
    return [CHECKS[name] for name in scenario.checks if kind in CHECKS[name].kinds]


def _unique(label: str, seen: set[str]) -> str:
    candidate, suffix = label, 2
    while candidate in seen:
        candidate = f"{label}#{suffix}"
        suffix += 1
    seen.add(candidate)
    return candidate


async def run_scenario_async(scenario: Scenario) -> RunReport:
    """Run every requested check on every instance it applies to.

    Parameters
    ----------
    scenario : Scenario
        Validated scenario.

    Returns
    -------
    RunReport
        Reports in instance order, then check order. Numeric failures are
        recorded on the affected checks.

    Raises
    ------
    ConfigError
        If the scenario references unknown names.
    """
    validate_scenario(scenario)
    settings = get_settings()
    started = time.perf_counter()
    timestamp = datetime.now(UTC).isoformat(timespec="seconds")
    limiter = anyio.CapacityLimiter(settings.threads)
    samples = scenario.samples
    log_event(
        action="scenario.started",
        resource_type="scenario",
        resource_id=scenario.name,
        metadata={"instances": len(scenario.instances), "checks": len(scenario.checks)},
    )
    reports: list[CheckReport] = []
    point_sets: list[InstancePoints] = []
    seen: set[str] = set()
    for index, spec in enumerate(scenario.instances):
        checks = _applicable(scenario, spec.kind)
        try:
            built = build_instance(spec, index)
        except ConfigError:
            raise
        except RicciHessianError as exc:
            label = _unique(spec.label or f"{spec.kind}_{index}", seen)
            for check in checks:
                reports.append(
                    _report(
                        check,
                        label,
                        spec.kind,
                        _expected(check.name, spec, {}, scenario),
                        overrides=scenario.tolerances,
                        error=f"{type(exc).__name__}: {exc}",
                    )
                )
            continue
        built = replace(built, label=_unique(built.label, seen))
        points: list[FloatArray] = []
        sampling_error = None
        if built.domain is not None:
            try:
                points = sample_points(
                    _inset(built.domain, samples.margin),
                    samples.count,
                    samples.seed,
                    extra=built.exclusions,
                )
            except RicciHessianError as exc:
                sampling_error = f"{type(exc).__name__}: {exc}"
        point_sets.append(
            InstancePoints(
                instance=built.label, points=[[float(v) for v in p] for p in points]
            )
        )
        for check in checks:
            expected = _expected(check.name, spec, built.expected, scenario)
            if sampling_error is not None:
                reports.append(
                    _report(
                        check,
                        built.label,
                        built.kind,
                        expected,
                        overrides=scenario.tolerances,
                        error=sampling_error,
                    )
                )
                continue
            reports.append(
                await _run_check(
                    check, spec, built, points, scenario, expected, limiter
                )
            )
    verdict = verdict_of(all(report.matched for report in reports))
    wall_time = time.perf_counter() - started
    log_event(
        action="scenario.completed",
        resource_type="scenario",
        resource_id=scenario.name,
        metadata={"verdict": verdict, "checks": len(reports), "wall_time": wall_time},
    )
    return RunReport(
        scenario=scenario.model_dump(mode="json"),
        checks=reports,
        points=point_sets,
        residuals={report.key: dict(report.values) for report in reports},
        verdicts={report.key: report.verdict for report in reports},
        verdict=verdict,
        meta=RunMeta(
            version=__version__,
            seed=samples.seed,
            samples=samples.count,
            timing=RunTiming(timestamp=timestamp, wall_time=wall_time),
        ),
    )


def run_scenario(scenario: Scenario) -> RunReport:
    """Run a scenario from synchronous code, see :func:`run_scenario_async`."""
    return anyio.run(run_scenario_async, scenario)
