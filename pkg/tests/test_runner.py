"""Tests for scenario parsing and execution."""

from __future__ import annotations

import logging
from pathlib import Path

import pytest

from rhlab.exceptions import ConfigError
from rhlab.services import runner

SPHERE = """\
name = "sphere"
checks = ["rh_residual", "mu"]

[samples]
count = 4
seed = 3

[[instances]]
kind = "catalog"
entry = "sphere2_linear_form"

[options.mu]
expected = 2.0
"""

Z_SQUARED = """\
name = "z_squared"
checks = ["rh_residual"]

[samples]
count = 4

[[instances]]
kind = "catalog"
entry = "sphere2_z_squared"
"""


class TestParseScenario:
    """Scenario validation."""

    def test_valid(self) -> None:
        """Parse a small scenario.

        Returns
        -------
        None
            Asserts instances, samples and options are read.
        """
        scenario = runner.parse_scenario(SPHERE)
        assert scenario.name == "sphere"
        assert scenario.instances[0].kind == "catalog"
        assert scenario.samples.count == 4
        assert scenario.samples.seed == 3
        assert scenario.options["mu"]["expected"] == 2.0

    def test_single_instance_table(self) -> None:
        """Use ``[instance]`` instead of ``[[instances]]``.

        Returns
        -------
        None
            Asserts the table becomes a one-element list.
        """
        text = SPHERE.replace("[[instances]]", "[instance]")
        assert len(runner.parse_scenario(text).instances) == 1

    def test_unknown_check(self) -> None:
        """Request a check that does not exist.

        Returns
        -------
        None
            Asserts the error points at ``checks``.
        """
        text = SPHERE.replace('"mu"]', '"mu", "ricci_flow"]')
        with pytest.raises(ConfigError) as info:
            runner.parse_scenario(text)
        assert info.value.field == "checks"
        assert info.value.exit_code == 2

    def test_inapplicable_check(self) -> None:
        """Request the extension check for a catalog instance.

        Returns
        -------
        None
            Asserts the error points at ``checks``.
        """
        text = SPHERE.replace('"mu"]', '"mu", "extension"]')
        with pytest.raises(ConfigError) as info:
            runner.parse_scenario(text)
        assert info.value.field == "checks"

    def test_toml_syntax_error(self) -> None:
        """Parse broken TOML.

        Returns
        -------
        None
            Asserts the line of the error is reported.
        """
        with pytest.raises(ConfigError) as info:
            runner.parse_scenario('name = "x"\nchecks = [\n[samples]\n')
        assert info.value.line is not None

    def test_schema_error_has_field_and_line(self) -> None:
        """Give an out-of-range sample count.

        Returns
        -------
        None
            Asserts the dotted field and its line are reported.
        """
        text = SPHERE.replace("count = 4", "count = 0")
        with pytest.raises(ConfigError) as info:
            runner.parse_scenario(text)
        assert info.value.field == "samples.count"
        assert info.value.line == 5

    def test_unknown_key(self) -> None:
        """Misspell a top-level key.

        Returns
        -------
        None
            Asserts extra keys are rejected.
        """
        with pytest.raises(ConfigError) as info:
            runner.parse_scenario('sampels = "typo"\n' + SPHERE)
        assert info.value.field == "sampels"

    @pytest.mark.parametrize(
        ("extra", "field"),
        [
            ("[tolerances]\nkahler = 1e-6\n", "tolerances.kahler"),
            ('[expect]\nlevel_set = "pass"\n', "expect.level_set"),
        ],
    )
    def test_keys_must_name_requested_checks(self, extra: str, field: str) -> None:
        """Key a tolerance or expectation by a check that is not requested.

        Parameters
        ----------
        extra : str
            TOML appended to the scenario.
        field : str
            Expected error field.

        Returns
        -------
        None
            Asserts the offending key is reported.
        """
        with pytest.raises(ConfigError) as info:
            runner.parse_scenario(SPHERE + extra)
        assert info.value.field == field

    def test_non_positive_tolerance(self) -> None:
        """Give a zero tolerance.

        Returns
        -------
        None
            Asserts the scenario is rejected.
        """
        with pytest.raises(ConfigError):
            runner.parse_scenario(SPHERE + "[tolerances]\nrh_residual = 0.0\n")

    def test_missing_file(self, tmp_path: Path) -> None:
        """Load a scenario that does not exist.

        Parameters
        ----------
        tmp_path : pathlib.Path
            Temporary directory.

        Returns
        -------
        None
            Asserts a ConfigError is raised.
        """
        with pytest.raises(ConfigError):
            runner.load_scenario(tmp_path / "absent.toml")


class TestOverrides:
    """Command-line overrides."""

    def test_seed_and_samples(self) -> None:
        """Override seed and sample count.

        Returns
        -------
        None
            Asserts both are replaced and the rest is kept.
        """
        scenario = runner.apply_overrides(
            runner.parse_scenario(SPHERE), seed=9, samples=2
        )
        assert (scenario.samples.seed, scenario.samples.count) == (9, 2)
        assert scenario.options["mu"]["expected"] == 2.0

    def test_bad_sample_count(self) -> None:
        """Override the sample count with zero.

        Returns
        -------
        None
            Asserts the error names ``samples.count``.
        """
        with pytest.raises(ConfigError) as info:
            runner.apply_overrides(runner.parse_scenario(SPHERE), samples=0)
        assert info.value.field == "samples.count"

    def test_tolerance_for_other_check(self) -> None:
        """Override the tolerance of a check that is not requested.

        Returns
        -------
        None
            Asserts a ConfigError is raised.
        """
        with pytest.raises(ConfigError):
            runner.apply_overrides(
                runner.parse_scenario(SPHERE), tolerances={"besse": 1e-3}
            )


class TestRunScenario:
    """End-to-end runs on small scenarios."""

    async def test_sphere_passes(self) -> None:
        """Run the height function on the round sphere.

        Returns
        -------
        None
            Asserts both checks pass and mu is 2.
        """
        report = await runner.run_scenario_async(runner.parse_scenario(SPHERE))
        assert report.verdict == "pass"
        assert list(report.verdicts) == [
            "sphere2_linear_form/rh_residual",
            "sphere2_linear_form/mu",
        ]
        assert report.residuals["sphere2_linear_form/mu"]["mean"] == pytest.approx(2.0)
        assert len(report.points[0].points) == 4
        rh = report.checks[0]
        assert len(rh.records) == 4
        assert rh.tolerances == {"rh_residual": 1e-8}
        assert report.meta.samples == 4
        assert report.meta.seed == 3

    async def test_tolerance_override_flips_verdict(self) -> None:
        """Judge the informational mean of mu.

        Returns
        -------
        None
            Asserts a value-specific tolerance makes the check fail.
        """
        scenario = runner.apply_overrides(
            runner.parse_scenario(SPHERE), tolerances={"mu.mean": 1.0}
        )
        report = await runner.run_scenario_async(scenario)
        mu = report.checks[1]
        assert mu.verdicts["mean"] == "fail"
        assert mu.verdict == "fail"
        assert report.verdict == "fail"

    async def test_catalog_expectation(self) -> None:
        """Run a documented non-solution.

        Returns
        -------
        None
            Asserts the failing check matches its catalog expectation.
        """
        report = await runner.run_scenario_async(runner.parse_scenario(Z_SQUARED))
        check = report.checks[0]
        assert (check.verdict, check.expected, check.matched) == ("fail", "fail", True)
        assert report.verdict == "pass"

    async def test_instance_expectation_wins(self) -> None:
        """Expect a pass on the instance table.

        Returns
        -------
        None
            Asserts the instance expectation overrides the catalog one.
        """
        text = Z_SQUARED + '\n[instances.expect]\nrh_residual = "pass"\n'
        report = await runner.run_scenario_async(runner.parse_scenario(text))
        check = report.checks[0]
        assert check.expected == "pass"
        assert not check.matched
        assert report.verdict == "fail"

    async def test_numeric_failure_is_recorded(self) -> None:
        """Run the extension check on a vanishing symmetric part.

        Returns
        -------
        None
            Asserts the error lands on the check instead of aborting the run.
        """
        text = """\
name = "degenerate"
checks = ["extension"]

[[instances]]
kind = "extension"
S = [[0.0]]
expect = { extension = "fail" }
"""
        report = await runner.run_scenario_async(runner.parse_scenario(text))
        check = report.checks[0]
        assert check.error is not None
        assert check.error.startswith("ZeroSymmetricPart")
        assert check.verdict == "fail"
        assert report.verdict == "pass"

    async def test_duplicate_labels(self) -> None:
        """Run the same entry twice.

        Returns
        -------
        None
            Asserts the second instance gets a suffixed label.
        """
        text = SPHERE.replace('checks = ["rh_residual", "mu"]', 'checks = ["mu"]')
        text += '\n[[instances]]\nkind = "catalog"\nentry = "sphere2_linear_form"\n'
        report = await runner.run_scenario_async(runner.parse_scenario(text))
        assert [check.instance for check in report.checks] == [
            "sphere2_linear_form",
            "sphere2_linear_form#2",
        ]

    def test_deterministic(self) -> None:
        """Run the same scenario twice.

        Returns
        -------
        None
            Asserts the reports agree outside the timing block.
        """
        scenario = runner.parse_scenario(SPHERE)
        first = runner.run_scenario(scenario).deterministic_dump()
        second = runner.run_scenario(scenario).deterministic_dump()
        assert first == second

    def test_events_are_logged(self, caplog: pytest.LogCaptureFixture) -> None:
        """Capture the structured run events.

        Parameters
        ----------
        caplog : pytest.LogCaptureFixture
            Captured log records.

        Returns
        -------
        None
            Asserts scenario and check events carry their keys.
        """
        caplog.set_level(logging.INFO, logger="rhlab.services.audit")
        runner.run_scenario(runner.parse_scenario(SPHERE))
        messages = [record.getMessage() for record in caplog.records]
        assert any(
            "action=check.completed resource=check:sphere2_linear_form/mu" in message
            and "matched=True" in message
            for message in messages
        )
        assert any("action=scenario.completed" in message for message in messages)
