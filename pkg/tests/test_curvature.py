"""Tests for connection and curvature computations."""

import math

import jax.numpy as jnp
import numpy as np
import pytest

from rhlab.exceptions import SingularMetric
from rhlab.geometry.curvature import (
    christoffel,
    curvature_invariants,
    curvature_pack,
    divergence_sym2,
    operator_norm,
    ricci_power,
    scalar_derivatives,
)
from rhlab.geometry.fields import ChartDomain, MetricField, ScalarField
from rhlab.geometry.jet import diagonal
from rhlab.services.catalog import make_space


def _degenerate_metric() -> MetricField:
    return MetricField(
        dim=2,
        components=lambda x: diagonal([1.0, x[0] * x[0]]),
        domain=ChartDomain.box([-1.0, -1.0], [1.0, 1.0]),
        label="degenerate",
    )


class TestCurvaturePack:
    def test_round_sphere_is_einstein(self) -> None:
        """Compute curvature of the unit sphere.

        Returns
        -------
        None
            Asserts ``Ric = g`` and ``S = 2``.
        """
        metric = make_space("sphere2").metric
        pack = curvature_pack(metric, [1.0, 0.5])
        np.testing.assert_allclose(pack.ric, np.eye(2), atol=1e-12)
        assert pack.scal == pytest.approx(2.0)
        np.testing.assert_allclose(pack.d_scal, 0.0, atol=1e-11)
        assert pack.lap_S == pytest.approx(0.0, abs=1e-9)

    def test_sphere_radius_scales_curvature(self) -> None:
        """Compute curvature of a sphere of radius 2.

        Returns
        -------
        None
            Asserts ``S = 2 / r^2``.
        """
        metric = make_space("sphere2", {"radius": 2.0}).metric
        pack = curvature_pack(metric, [0.8, 1.0])
        assert pack.scal == pytest.approx(0.5)

    def test_half_plane_is_hyperbolic(self) -> None:
        """Compute curvature of the upper half-plane.

        Returns
        -------
        None
            Asserts ``Ric = -g`` and ``S = -2``.
        """
        metric = make_space("hyperbolic2_halfplane").metric
        pack = curvature_pack(metric, [0.3, 1.2])
        np.testing.assert_allclose(pack.ric, -np.eye(2), atol=1e-12)
        assert pack.scal == pytest.approx(-2.0)

    def test_flat_space_has_no_curvature(self) -> None:
        """Compute curvature of flat three-space.

        Returns
        -------
        None
            Asserts Riemann, Ricci and Christoffel symbols vanish.
        """
        metric = make_space("euclidean", {"n": 3}).metric
        pack = curvature_pack(metric, [0.1, 0.2, 0.3])
        assert np.max(np.abs(pack.riemann)) == 0.0
        assert np.max(np.abs(christoffel(metric, [0.1, 0.2, 0.3]))) == 0.0
        assert pack.scal == 0.0

    def test_polar_christoffel_symbols(self) -> None:
        """Compare the connection of polar coordinates with the closed form.

        Returns
        -------
        None
            Asserts ``Gamma^r_tt = -r`` and ``Gamma^t_rt = 1 / r``.
        """
        metric = MetricField(
            dim=2,
            components=lambda x: diagonal([1.0, x[0] * x[0]]),
            domain=ChartDomain.box([0.5, 0.0], [2.0, 2.0 * math.pi]),
            label="polar",
        )
        gamma = christoffel(metric, [1.5, 0.3])
        assert gamma[0, 1, 1] == pytest.approx(-1.5)
        assert gamma[1, 0, 1] == pytest.approx(1.0 / 1.5)
        assert gamma[1, 1, 0] == pytest.approx(1.0 / 1.5)

    def test_degenerate_metric_raises(self) -> None:
        """Evaluate a metric that degenerates on an axis.

        Returns
        -------
        None
            Asserts ``SingularMetric`` is raised.
        """
        with pytest.raises(SingularMetric):
            curvature_pack(_degenerate_metric(), [0.0, 0.5])


class TestScalarDerivatives:
    def test_height_function_on_sphere(self) -> None:
        """Differentiate ``cos(theta)`` on the unit sphere.

        Returns
        -------
        None
            Asserts ``Hess f = -f g`` and ``Lap f = 2 f``.
        """
        metric = make_space("sphere2").metric
        f = ScalarField(lambda x: jnp.cos(x[0]), "z")
        derivatives = scalar_derivatives(metric, f, [0.7, 2.0])
        value = math.cos(0.7)
        np.testing.assert_allclose(derivatives.hessian, -value * np.eye(2), atol=1e-12)
        assert derivatives.laplacian == pytest.approx(2.0 * value)
        assert derivatives.gradient_norm == pytest.approx(math.sin(0.7))


class TestInvariants:
    @pytest.mark.parametrize(
        ("space", "params", "point"),
        [
            ("sphere2", {}, [1.0, 0.5]),
            ("hyperbolic2_halfplane", {}, [0.1, 0.9]),
            ("conformal_flat3", {"u": "x1x2"}, [0.2, -0.3, 0.1]),
            ("schwarzschild3", {"m": 1.0}, [1.5, 0.4, -0.7]),
        ],
    )
    def test_algebraic_identities_hold(
        self, space: str, params: dict, point: list[float]
    ) -> None:
        """Evaluate the curvature identities on several metrics.

        Returns
        -------
        None
            Asserts every defect is at rounding level.
        """
        defects = curvature_invariants(make_space(space, params).metric, point)
        assert set(defects) == {
            "antisymmetry",
            "bianchi_first",
            "ricci_trace",
            "contracted_bianchi",
        }
        assert max(defects.values()) < 1e-9

    def test_divergence_of_einstein_ricci_vanishes(self) -> None:
        """Take the divergence of Ricci powers on the sphere.

        Returns
        -------
        None
            Asserts the divergence of ``Ric^2`` vanishes.
        """
        metric = make_space("sphere2").metric
        divergence = divergence_sym2(metric, ricci_power(2), [1.2, 0.4])
        np.testing.assert_allclose(divergence, 0.0, atol=1e-10)

    def test_ricci_power_rejects_zero(self) -> None:
        """Request the zeroth Ricci power.

        Returns
        -------
        None
            Asserts ``ValueError`` is raised.
        """
        with pytest.raises(ValueError):
            ricci_power(0)

    def test_operator_norm_uses_metric(self) -> None:
        """Measure an endomorphism against a non-identity metric.

        Returns
        -------
        None
            Asserts the identity has norm one for any metric.
        """
        g = np.array([[4.0, 1.0], [1.0, 2.0]])
        assert operator_norm(np.eye(2), g) == pytest.approx(1.0)
