"""Run every shipped scenario and summarize the verdicts."""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

import anyio

from rhlab.exceptions import RicciHessianError
from rhlab.services import emit, runner

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"


@dataclass(frozen=True, slots=True)
class ScenarioResult:
    """Outcome of one scenario file.

    Attributes
    ----------
    path : Path
        Scenario file.
    exit_code : int
        CLI exit code the run maps to.
    summary : str
        One-line summary.
    """

    path: Path
    exit_code: int
    summary: str


async def run_file(path: Path, report_dir: Path | None) -> ScenarioResult:
    """Run one scenario file.

    Parameters
    ----------
    path : Path
        Scenario file.
    report_dir : Path | None
        Directory for JSON reports, or ``None`` to skip writing them.

    Returns
    -------
    ScenarioResult
        Exit code and summary.
    """
    try:
        scenario = runner.load_scenario(path)
        report = await runner.run_scenario_async(scenario)
        if report_dir is not None:
            emit.write_report(report, "json", report_dir / f"{path.stem}.json")
    except RicciHessianError as exc:
        return ScenarioResult(path, exc.exit_code, f"{type(exc).__name__}: {exc}")
    matched = sum(check.matched for check in report.checks)
    summary = (
        f"{report.verdict} ({matched}/{len(report.checks)} as expected, "
        f"{report.meta.timing.wall_time:.1f}s)"
    )
    return ScenarioResult(path, 0 if report.verdict == "pass" else 1, summary)


async def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dir", type=Path, default=SCENARIO_DIR)
    parser.add_argument("--reports", type=Path, default=None)
    args = parser.parse_args()
    results = [
        await run_file(path, args.reports) for path in sorted(args.dir.glob("*.toml"))
    ]
    for result in results:
        print(f"{result.path.stem:<24} {result.summary}")
    return max((result.exit_code for result in results), default=0)


if __name__ == "__main__":
    sys.exit(anyio.run(main))
