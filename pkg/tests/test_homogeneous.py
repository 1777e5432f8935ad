"""Tests for the one-dimensional extension conditions."""

import math

import numpy as np
import pytest

from rhlab.exceptions import BadParams, ZeroSymmetricPart
from rhlab.services import homogeneous


class TestExtensionConditions:
    def test_hyperbolic_line_extension(self) -> None:
        """Extend a point-like base to the hyperbolic plane.

        Returns
        -------
        None
            Asserts both conditions hold and the curvature is that of ``H^2``.
        """
        data = homogeneous.make_extension([[1.0]])
        conditions = homogeneous.extension_conditions(data)
        assert conditions.passed
        assert conditions.alpha == pytest.approx(-1.0)
        ricci = homogeneous.extension_ricci(data)
        assert ricci.ric_xi_xi == pytest.approx(-1.0)
        np.testing.assert_allclose(ricci.ric_block, [[-1.0]])
        assert ricci.scalar == pytest.approx(-2.0)
        assert ricci.mu == pytest.approx(0.0)
        assert ricci.rh_residual == pytest.approx(0.0, abs=1e-15)

    def test_scaling_keeps_verdict(self) -> None:
        """Scale the derivation by three.

        Returns
        -------
        None
            Asserts ``alpha`` scales inversely and the geometry is unchanged.
        """
        data = homogeneous.scaled_extension(homogeneous.make_extension([[1.0]]), 3.0)
        conditions = homogeneous.extension_conditions(data)
        assert conditions.passed
        assert conditions.alpha == pytest.approx(-1.0 / 3.0)
        ricci = homogeneous.extension_ricci(data)
        assert ricci.scalar == pytest.approx(-2.0)
        assert ricci.mu == pytest.approx(0.0, abs=1e-14)

    def test_flat_identity_fails_both_signs(self) -> None:
        """Extend a flat plane by the identity derivation.

        Returns
        -------
        None
            Asserts neither sign satisfies the Ricci condition.
        """
        data = homogeneous.make_extension(np.eye(2))
        signs = homogeneous.both_signs(data)
        assert set(signs) == {1, -1}
        assert not any(result.passed for result in signs.values())
        expected = (2.0 - math.sqrt(2.0)) / math.sqrt(2.0)
        assert signs[-1].res_ric == pytest.approx(expected)

    def test_divergence_condition(self) -> None:
        """Give the symmetric part a nonzero divergence.

        Returns
        -------
        None
            Asserts the divergence residual fails the conditions.
        """
        data = homogeneous.make_extension([[1.0]], div_S=[0.5])
        conditions = homogeneous.extension_conditions(data)
        assert conditions.res_div == pytest.approx(0.5)
        assert not conditions.passed
        np.testing.assert_allclose(homogeneous.extension_ricci(data).ric_mixed, [-0.5])

    def test_solved_base_ricci_passes_one_sign(self) -> None:
        """Use the base Ricci tensor that solves the negative sign.

        Returns
        -------
        None
            Asserts exactly the negative sign passes.
        """
        skew = [[0.0, 0.7], [-0.7, 0.0]]
        base = homogeneous.make_extension(np.diag([1.0, -1.0]), skew)
        data = homogeneous.make_extension(
            base.S_mat, skew, homogeneous.solved_base_ricci(base)
        )
        signs = homogeneous.both_signs(data)
        assert signs[-1].passed
        assert not signs[1].passed
        assert homogeneous.extension_ricci(data).rh_residual < 1e-12


class TestExtensionValidation:
    def test_zero_symmetric_part(self) -> None:
        """Use a vanishing symmetric part.

        Returns
        -------
        None
            Asserts ``ZeroSymmetricPart`` is raised.
        """
        data = homogeneous.make_extension(np.zeros((2, 2)))
        with pytest.raises(ZeroSymmetricPart):
            homogeneous.extension_conditions(data)

    @pytest.mark.parametrize(
        ("kwargs", "message"),
        [
            ({"S_mat": [[1.0, 2.0], [0.0, 1.0]]}, "symmetric"),
            ({"S_mat": np.eye(2), "A_mat": np.eye(2)}, "skew"),
            ({"S_mat": np.eye(2), "div_S": [1.0]}, "div S"),
            ({"S_mat": [[1.0]], "epsilon": 0}, "epsilon"),
        ],
    )
    def test_malformed_data(self, kwargs: dict, message: str) -> None:
        """Build extension data with inconsistent input.

        Returns
        -------
        None
            Asserts ``BadParams`` names the problem.
        """
        with pytest.raises(BadParams, match=message):
            homogeneous.make_extension(**kwargs)

    def test_scale_must_be_positive(self) -> None:
        """Scale by a negative factor.

        Returns
        -------
        None
            Asserts ``BadParams`` is raised.
        """
        with pytest.raises(BadParams):
            homogeneous.scaled_extension(homogeneous.make_extension([[1.0]]), -1.0)
