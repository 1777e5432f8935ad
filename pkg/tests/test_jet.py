"""Tests for forward-mode Taylor expansion of chart functions."""

import jax
import jax.numpy as jnp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rhlab.geometry.jet import (
    block_diagonal,
    compiled_taylor,
    diagonal,
    nested_jacobians,
    taylor,
)

coords = st.floats(min_value=-1.5, max_value=1.5, allow_nan=False)


def _cubic(x: jax.Array) -> jax.Array:
    return x[0] ** 3 * x[1] + 2.0 * x[1] ** 2


def _pythagorean(x: jax.Array) -> jax.Array:
    u = x[0] * x[1] + x[0]
    return jnp.sin(u) ** 2 + jnp.cos(u) ** 2


def _inner(x: jax.Array) -> jax.Array:
    return x[0] - 0.5 * x[1] ** 2


def _log_exp(x: jax.Array) -> jax.Array:
    return jnp.log(jnp.exp(_inner(x)))


def _matrix(x: jax.Array) -> jax.Array:
    return jnp.array(
        [
            [2.0 + x[0] ** 2, x[0] * x[1]],
            [x[0] * x[1], 1.0 + jnp.exp(x[1])],
        ]
    )


def _inverse_product(x: jax.Array) -> jax.Array:
    a = _matrix(x)
    return jnp.linalg.inv(a) @ a


class TestTaylor:
    def test_polynomial_derivatives_are_exact(self) -> None:
        """Differentiate a cubic polynomial.

        Returns
        -------
        None
            Asserts the gradient and Hessian match the closed form.
        """
        jet = taylor(_cubic, [0.5, -2.0], 3)
        assert float(jet.value) == pytest.approx(0.125 * -2.0 + 8.0)
        np.testing.assert_allclose(jet.d1, [3 * 0.25 * -2.0, 0.125 - 8.0])
        np.testing.assert_allclose(
            jet.d2, [[6 * 0.5 * -2.0, 3 * 0.25], [3 * 0.25, 4.0]]
        )
        assert jet.d3[0, 0, 0] == pytest.approx(6.0 * -2.0)
        assert jet.d3[0, 0, 1] == pytest.approx(6.0 * 0.5)

    def test_monomial_at_sample_point(self) -> None:
        """Expand ``x^2 y`` at ``(1, 2)``.

        Returns
        -------
        None
            Asserts value ``2``, gradient ``(4, 1)`` and the exact Hessian.
        """
        jet = taylor(lambda x: x[0] ** 2 * x[1], [1.0, 2.0], 2)
        assert float(jet.value) == pytest.approx(2.0)
        np.testing.assert_allclose(jet.d1, [4.0, 1.0])
        np.testing.assert_allclose(jet.d2, [[4.0, 2.0], [2.0, 0.0]])

    def test_exponential_derivatives_are_one(self) -> None:
        """Expand ``exp`` at the origin.

        Returns
        -------
        None
            Asserts every derivative through fourth order equals one.
        """
        jet = taylor(lambda x: jnp.exp(x[0]), [0.0], 4)
        for k in range(5):
            np.testing.assert_allclose(jet.derivative(k), np.ones((1,) * k))

    def test_constant_has_zero_derivatives(self) -> None:
        """Expand a constant.

        Returns
        -------
        None
            Asserts all derivatives vanish and the jet is finite.
        """
        jet = taylor(lambda x: 3.0, [0.2, 0.4, 0.6], 2)
        assert float(jet.value) == pytest.approx(3.0)
        np.testing.assert_array_equal(jet.d1, np.zeros(3))
        np.testing.assert_array_equal(jet.d2, np.zeros((3, 3)))
        assert jet.is_finite()

    @settings(max_examples=40, deadline=None)
    @given(a=coords, b=coords)
    def test_pythagorean_identity(self, a: float, b: float) -> None:
        """Check ``sin^2 + cos^2 = 1`` through third order.

        Returns
        -------
        None
            Asserts all derivatives of the identity vanish.
        """
        jet = taylor(_pythagorean, [a, b], 3)
        assert float(jet.value) == pytest.approx(1.0)
        np.testing.assert_allclose(jet.d1, 0.0, atol=1e-12)
        np.testing.assert_allclose(jet.d2, 0.0, atol=1e-12)
        np.testing.assert_allclose(jet.d3, 0.0, atol=1e-11)

    @settings(max_examples=40, deadline=None)
    @given(a=coords, b=coords)
    def test_log_inverts_exp(self, a: float, b: float) -> None:
        """Compose ``log`` with ``exp``.

        Returns
        -------
        None
            Asserts the composition reproduces every derivative of the input.
        """
        back = taylor(_log_exp, [a, b], 3)
        direct = taylor(_inner, [a, b], 3)
        for k in range(4):
            np.testing.assert_allclose(
                back.derivative(k), direct.derivative(k), atol=1e-11
            )

    def test_negative_base_with_integer_exponent(self) -> None:
        """Raise a negative value to an integer power.

        Returns
        -------
        None
            Asserts the cube of ``x`` near ``-1`` has exact derivatives.
        """
        jet = taylor(lambda x: x[0] ** 3, [-1.0], 4)
        assert float(jet.value) == pytest.approx(-1.0)
        assert jet.d1[0] == pytest.approx(3.0)
        assert jet.d2[0, 0] == pytest.approx(-6.0)
        assert jet.d3[0, 0, 0] == pytest.approx(6.0)
        assert jet.derivative(4)[0, 0, 0, 0] == pytest.approx(0.0)

    def test_derivative_beyond_order_raises(self) -> None:
        """Ask for a derivative the jet does not carry.

        Returns
        -------
        None
            Asserts ``ValueError`` is raised.
        """
        jet = taylor(lambda x: x[0], [0.0], 1)
        with pytest.raises(ValueError):
            jet.derivative(2)

    def test_negative_order_is_rejected(self) -> None:
        """Build a derivative stack of negative order.

        Returns
        -------
        None
            Asserts ``ValueError`` is raised.
        """
        with pytest.raises(ValueError):
            nested_jacobians(_cubic, -1)

    def test_compiled_expansion_is_reused(self) -> None:
        """Expand the same function twice.

        Returns
        -------
        None
            Asserts the compiled stack is shared between calls.
        """
        assert compiled_taylor(_cubic, 2) is compiled_taylor(_cubic, 2)

    def test_returned_blocks_are_writable(self) -> None:
        """Modify a returned derivative block.

        Returns
        -------
        None
            Asserts the jet owns plain writable arrays.
        """
        jet = taylor(_cubic, [0.1, 0.2], 2)
        jet.d2[0, 0] = 0.0
        assert jet.d2.flags.writeable


class TestMatrixExpansion:
    def test_inverse_times_matrix_is_identity(self) -> None:
        """Invert a position-dependent matrix.

        Returns
        -------
        None
            Asserts ``A^{-1} A`` has identity value and vanishing derivatives.
        """
        jet = taylor(_inverse_product, [0.2, -0.4], 3)
        np.testing.assert_allclose(jet.value, np.eye(2), atol=1e-13)
        np.testing.assert_allclose(jet.d1, 0.0, atol=1e-12)
        np.testing.assert_allclose(jet.d3, 0.0, atol=1e-10)

    def test_derivative_axes_follow_value_axes(self) -> None:
        """Expand a matrix-valued function.

        Returns
        -------
        None
            Asserts ``d1[i, j, c]`` is the partial of entry ``(i, j)`` in ``c``.
        """
        jet = taylor(_matrix, [0.2, -0.4], 2)
        assert jet.shape == (2, 2)
        assert jet.d1.shape == (2, 2, 2)
        assert jet.d1[0, 0, 0] == pytest.approx(0.4)
        assert jet.d1[0, 1, 0] == pytest.approx(-0.4)
        assert jet.d1[0, 1, 1] == pytest.approx(0.2)
        assert jet.d1[1, 1, 1] == pytest.approx(np.exp(-0.4))

    def test_diagonal_trace(self) -> None:
        """Build a diagonal matrix and take its trace.

        Returns
        -------
        None
            Asserts the trace is the sum of the diagonal entries.
        """
        jet = taylor(lambda x: jnp.trace(diagonal([x[0], x[1] ** 2])), [1.0, 2.0], 2)
        assert float(jet.value) == pytest.approx(5.0)
        np.testing.assert_allclose(jet.d1, [1.0, 4.0])

    def test_block_diagonal_layout(self) -> None:
        """Assemble scalar and matrix blocks.

        Returns
        -------
        None
            Asserts blocks land on the diagonal with zero coupling.
        """
        matrix = np.asarray(block_diagonal([2.0, np.eye(2) * 3.0]))
        expected = np.diag([2.0, 3.0, 3.0])
        np.testing.assert_array_equal(matrix, expected)
