"""Tests for the check registry and its judging helpers."""

from __future__ import annotations

import math
from collections.abc import Callable

import numpy as np
import pytest

from rhlab.exceptions import CriticalPoint, PointExcluded, SingularMetric
from rhlab.schemas.report import PointRecord
from rhlab.services import checks


def _raise(exc: Exception) -> Callable[[np.ndarray], dict[str, float]]:
    def evaluate(point: np.ndarray) -> dict[str, float]:
        raise exc

    return evaluate


class TestRegistry:
    """Check registry."""

    def test_lookup(self) -> None:
        """Look up checks by name.

        Returns
        -------
        None
            Asserts known names resolve and unknown names raise KeyError.
        """
        assert checks.get_check("rh_residual").pointwise
        assert not checks.get_check("mu").pointwise
        with pytest.raises(KeyError):
            checks.get_check("no_such_check")

    def test_every_check_runs_something(self) -> None:
        """Inspect all registered checks.

        Returns
        -------
        None
            Asserts each check has exactly one runner, kinds and tolerances.
        """
        listed = checks.list_checks()
        assert [check.name for check in listed] == list(checks.CHECKS)
        for check in listed:
            assert (check.point is None) != (check.aggregate is None)
            assert check.kinds
            assert all(tol > 0.0 for tol in check.tolerances.values())

    def test_kind_sets(self) -> None:
        """Check which instance kinds the checks accept.

        Returns
        -------
        None
            Asserts extension data only reaches the extension check.
        """
        accepting = [c.name for c in checks.list_checks() if "extension" in c.kinds]
        assert accepting == ["extension"]
        assert checks.get_check("besse").kinds == checks.WARPED_KINDS


class TestJudging:
    """Tolerance resolution and verdicts."""

    def test_defaults_and_overrides(self) -> None:
        """Resolve tolerances for the curvature invariants.

        Returns
        -------
        None
            Asserts check-wide and value-specific overrides apply in order.
        """
        check = checks.get_check("curvature_invariants")
        values = {"antisymmetry": 0.0, "ricci_trace": 0.0, "bianchi_first": 0.0}
        resolved = checks.resolve_tolerances(
            check,
            values,
            {"curvature_invariants": 1e-3, "curvature_invariants.ricci_trace": 1e-2},
        )
        assert resolved == {
            "antisymmetry": 1e-3,
            "ricci_trace": 1e-2,
            "bianchi_first": 1e-3,
        }

    def test_informational_values(self) -> None:
        """Resolve tolerances for values without a default.

        Returns
        -------
        None
            Asserts only an explicit value override makes them judged.
        """
        check = checks.get_check("mu")
        values = {"mean": 2.0, "spread": 0.0, "relative_spread": 0.0}
        assert checks.resolve_tolerances(check, values, {}) == {
            "relative_spread": 1e-8
        }
        assert checks.resolve_tolerances(check, values, {"mu.mean": 3.0})["mean"] == 3.0

    def test_nan_fails(self) -> None:
        """Judge values against tolerances.

        Returns
        -------
        None
            Asserts NaN and values at the tolerance fail.
        """
        verdicts = checks.judge(
            {"a": 1e-12, "b": math.nan, "c": 1e-8}, {"a": 1e-8, "b": 1e-8, "c": 1e-8}
        )
        assert verdicts == {"a": "pass", "b": "fail", "c": "fail"}

    def test_worst_values(self) -> None:
        """Reduce per-point residuals.

        Returns
        -------
        None
            Asserts the maximum over ok points is kept.
        """
        records = [
            PointRecord(point=[0.0], residuals={"r": 1e-9}),
            PointRecord(point=[1.0], residuals={"r": 3e-9}),
            PointRecord(point=[2.0], residuals={"r": 1.0}, status="skipped"),
        ]
        assert checks.worst_values(records) == {"r": 3e-9}


class TestEvaluatePoint:
    """Per-point failure handling."""

    def test_ok(self) -> None:
        """Evaluate a well-behaved function.

        Returns
        -------
        None
            Asserts residuals become floats.
        """
        record = checks.evaluate_point(
            lambda point: {"r": np.float64(point.sum())}, np.array([0.5, 0.25])
        )
        assert record.status == "ok"
        assert record.residuals == {"r": 0.75}
        assert record.point == [0.5, 0.25]

    @pytest.mark.parametrize(
        "exc", [CriticalPoint("flat gradient"), PointExcluded("pole")]
    )
    def test_skipped(self, exc: Exception) -> None:
        """Evaluate where the check is undefined.

        Parameters
        ----------
        exc : Exception
            Exception raised by the evaluation.

        Returns
        -------
        None
            Asserts the point is skipped.
        """
        record = checks.evaluate_point(_raise(exc), np.zeros(2))
        assert record.status == "skipped"
        assert record.residuals == {}

    @pytest.mark.parametrize(
        "exc",
        [
            SingularMetric("det 0"),
            ZeroDivisionError("x"),
            np.linalg.LinAlgError("singular"),
        ],
    )
    def test_error(self, exc: Exception) -> None:
        """Evaluate a failing function.

        Parameters
        ----------
        exc : Exception
            Exception raised by the evaluation.

        Returns
        -------
        None
            Asserts the failure is recorded with its type.
        """
        record = checks.evaluate_point(_raise(exc), np.zeros(2))
        assert record.status == "error"
        assert record.error is not None
        assert record.error.startswith(type(exc).__name__)

    def test_programming_errors_propagate(self) -> None:
        """Evaluate a function with a bug.

        Returns
        -------
        None
            Asserts errors outside the numeric family are not swallowed.
        """
        with pytest.raises(TypeError):
            checks.evaluate_point(_raise(TypeError("bug")), np.zeros(2))
