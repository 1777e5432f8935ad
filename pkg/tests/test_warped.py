"""Tests for warped products and their reduction cases."""

from dataclasses import replace

import numpy as np
import pytest

from rhlab.exceptions import CaseMismatch, NonPositiveWarp, UnknownEntry
from rhlab.geometry.fields import ScalarField
from rhlab.services import catalog, verifier, warped
from rhlab.services.sampling import sample_points

CASE_A_SOLUTIONS = [
    "hyperbolic_line",
    "cylinder_sphere",
    "polar3_linear",
    "polar4_height",
]


def _points(spec: warped.WarpedSpec, count: int = 6) -> list[np.ndarray]:
    inst = warped.instance(spec)
    return sample_points(
        inst.domain, count, seed=11, extra=warped.sampling_exclusions(spec)
    )


class TestAssembly:
    @pytest.mark.parametrize("name", CASE_A_SOLUTIONS + ["line_torus_affine"])
    def test_presets_solve_equation(self, name: str) -> None:
        """Assemble the solution presets.

        Returns
        -------
        None
            Asserts the assembled candidate solves the equation.
        """
        spec = warped.make_preset(name)
        inst = warped.instance(spec)
        for point in _points(spec):
            assert verifier.rh_residual(inst, point) < 1e-9

    @pytest.mark.parametrize(
        "name", ["cylinder_sphere_square", "line_torus_square", "polar4_wrong_radius"]
    )
    def test_negative_presets_fail(self, name: str) -> None:
        """Assemble presets that are not solutions.

        Returns
        -------
        None
            Asserts the residual is large somewhere.
        """
        spec = warped.make_preset(name)
        inst = warped.instance(spec)
        worst = max(verifier.rh_residual(inst, point) for point in _points(spec))
        assert worst > 1e-3

    @pytest.mark.parametrize("name", sorted(warped.PRESETS))
    def test_block_ricci_matches_direct_curvature(self, name: str) -> None:
        """Compare the block Ricci formulas with jets of the full metric.

        Returns
        -------
        None
            Asserts the two agree.
        """
        spec = warped.make_preset(name)
        for point in _points(spec, 3):
            assert warped.besse_residual(spec, point) < 1e-9

    def test_nonpositive_warp_is_rejected(self) -> None:
        """Evaluate the metric where the warp is negative.

        Returns
        -------
        None
            Asserts ``NonPositiveWarp`` is raised.
        """
        metric, _ = warped.assemble(warped.make_preset("polar3_linear"))
        with pytest.raises(NonPositiveWarp):
            metric.jet([-0.5, 1.0, 1.0], 2)

    def test_unknown_preset(self) -> None:
        """Request a preset that does not exist.

        Returns
        -------
        None
            Asserts ``UnknownEntry`` is raised.
        """
        with pytest.raises(UnknownEntry):
            warped.make_preset("nowhere")


class TestReductionCases:
    @pytest.mark.parametrize(
        ("name", "mu1"),
        [
            ("hyperbolic_line", 0.0),
            ("cylinder_sphere", 0.0),
            ("polar3_linear", 0.0),
            ("polar4_height", 1.0),
        ],
    )
    def test_case_a_constants(self, name: str, mu1: float) -> None:
        """Evaluate the case ``a`` residuals on solutions.

        Returns
        -------
        None
            Asserts the residuals vanish and ``mu1`` has the expected value.
        """
        spec = warped.make_preset(name)
        result = warped.case_a_residuals(spec, _points(spec))
        assert result.constant.mean == pytest.approx(mu1, abs=1e-10)
        summary = result.worst()
        assert summary["base"] < 1e-9
        assert summary["fiber"] < 1e-9
        assert summary["constant_spread"] < 1e-9

    def test_case_b_on_flat_torus(self) -> None:
        """Evaluate the case ``b`` residuals of an affine base function.

        Returns
        -------
        None
            Asserts the base equation holds and the fiber is Ricci-flat.
        """
        spec = warped.make_preset("line_torus_affine")
        result = warped.case_b_residuals(spec, _points(spec))
        assert result.constant.mean == pytest.approx(0.0, abs=1e-12)
        assert result.worst()["base"] < 1e-12
        assert result.worst()["einstein_fiber"] < 1e-12

    def test_equivalence_has_no_mismatch(self) -> None:
        """Compare case conditions with the assembled residual.

        Returns
        -------
        None
            Asserts both sides agree on solutions and non-solutions.
        """
        for name in ("polar3_linear", "cylinder_sphere_square", "line_torus_square"):
            spec = warped.make_preset(name)
            records = warped.equivalence_records(spec, _points(spec), 1e-7)
            assert all(record["mismatch"] == 0.0 for record in records)

    def test_case_a_needs_matching_warp(self) -> None:
        """Tag a spec as case ``a`` with ``f1 != phi``.

        Returns
        -------
        None
            Asserts ``CaseMismatch`` is raised.
        """
        spec = warped.make_preset("polar3_linear")
        broken = replace(spec, f1=ScalarField(lambda x: 2.0 * x[0], "2t"))
        with pytest.raises(CaseMismatch):
            warped.case_a_residuals(broken, _points(spec, 2))

    def test_case_b_residuals_reject_case_a(self) -> None:
        """Ask for case ``b`` residuals of a case ``a`` spec.

        Returns
        -------
        None
            Asserts ``CaseMismatch`` is raised.
        """
        spec = warped.make_preset("cylinder_sphere")
        with pytest.raises(CaseMismatch):
            warped.case_b_residuals(spec, _points(spec, 2))


class TestMuRelation:
    def test_corrected_relation_holds(self) -> None:
        """Compare mu of the product with the fiber invariant.

        Returns
        -------
        None
            Asserts ``mu = mu2`` and the stated form misses where
            ``grad f1`` and ``f2`` are nonzero.
        """
        spec = warped.make_preset("polar3_linear")
        result = warped.mu_relation_check(spec, _points(spec))
        assert result["summary"]["corrected"] < 1e-9
        assert result["summary"]["stated"] > 1e-3

    def test_relation_on_cylinder(self) -> None:
        """Compare both forms where ``grad f1`` vanishes.

        Returns
        -------
        None
            Asserts both forms hold.
        """
        spec = warped.make_preset("cylinder_sphere")
        summary = warped.mu_relation_check(spec, _points(spec))["summary"]
        assert summary["corrected"] < 1e-9
        assert summary["stated"] < 1e-9


class TestProductSplit:
    def test_extension_across_flat_factor(self) -> None:
        """Split a solution on the torus times the sphere.

        Returns
        -------
        None
            Asserts all residuals vanish.
        """
        torus = catalog.make_space("flat_torus", {"n": 2})
        sphere = catalog.make_space("sphere2")
        height = catalog.make_solution("linear_form", {}, sphere)
        rows = warped.product_split_check(
            torus, sphere, height, [[1.0, 2.0, 1.0, 0.5], [3.0, 0.5, 2.0, 4.0]]
        )
        for row in rows:
            assert max(row.values()) < 1e-10

    def test_extension_across_curved_factor(self) -> None:
        """Split a solution on the sphere times the sphere.

        Returns
        -------
        None
            Asserts the base is not Ricci-flat and the extension fails.
        """
        sphere = catalog.make_space("sphere2")
        height = catalog.make_solution("linear_form", {}, sphere)
        (row,) = warped.product_split_check(
            sphere, sphere, height, [[1.0, 2.0, 1.0, 0.5]]
        )
        assert row["factor"] < 1e-10
        assert row["base_ricci"] == pytest.approx(1.0)
        assert row["rh_residual"] > 0.1
