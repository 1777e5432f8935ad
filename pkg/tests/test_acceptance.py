"""Tests for the shipped scenarios and the acceptance runner."""

from __future__ import annotations

from pathlib import Path

import pytest

from rhlab.services import emit, runner
from scripts.run_acceptance import run_file
from tests.conftest import SCENARIO_DIR

SHIPPED = sorted(SCENARIO_DIR.glob("*.toml"))


class TestShippedScenarios:
    """Scenario files under ``scenarios/``."""

    def test_present(self) -> None:
        """Look for shipped scenarios.

        Returns
        -------
        None
            Asserts the directory is not empty.
        """
        assert SHIPPED

    @pytest.mark.parametrize("path", SHIPPED, ids=lambda path: path.stem)
    def test_valid(self, path: Path) -> None:
        """Validate a shipped scenario without running it.

        Parameters
        ----------
        path : Path
            Scenario file.

        Returns
        -------
        None
            Asserts the file loads with at least one instance and check.
        """
        scenario = runner.load_scenario(path)
        assert scenario.instances
        assert scenario.checks

    def test_deterministic_reports(self) -> None:
        """Run a reduced sphere scenario twice.

        Returns
        -------
        None
            Asserts the reports agree once timing is dropped.
        """
        scenario = runner.apply_overrides(
            runner.load_scenario(SCENARIO_DIR / "obata.toml"), samples=6
        )
        first = runner.run_scenario(scenario)
        second = runner.run_scenario(scenario)
        assert first.deterministic_dump() == second.deterministic_dump()
        assert first.verdict == "pass"
        assert first.points == second.points


class TestRunFile:
    """The acceptance script."""

    async def test_passing_file(self, tmp_path: Path) -> None:
        """Run the extension scenario and keep its report.

        Parameters
        ----------
        tmp_path : Path
            Report directory.

        Returns
        -------
        None
            Asserts exit code 0 and a readable JSON report.
        """
        result = await run_file(SCENARIO_DIR / "homogeneous.toml", tmp_path)
        assert result.exit_code == 0
        assert result.summary.startswith("pass")
        report = emit.load_report(tmp_path / "homogeneous.json")
        assert all(check.matched for check in report.checks)

    async def test_broken_file(self, tmp_path: Path) -> None:
        """Run a scenario with an unknown check.

        Parameters
        ----------
        tmp_path : Path
            Temporary directory.

        Returns
        -------
        None
            Asserts the configuration exit code is reported.
        """
        path = tmp_path / "broken.toml"
        path.write_text(
            'name = "broken"\nchecks = ["nope"]\n\n[[instances]]\n'
            'kind = "catalog"\nentry = "sphere2_linear_form"\n',
            encoding="utf-8",
        )
        result = await run_file(path, None)
        assert result.exit_code == 2
        assert result.summary.startswith("ConfigError")
