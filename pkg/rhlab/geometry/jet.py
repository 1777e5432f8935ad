"""Taylor jets of chart functions by forward-mode automatic differentiation.

Fields are written as :mod:`jax.numpy` functions of the coordinate vector.
:func:`taylor` nests :func:`jax.jacfwd` to the requested order and compiles
the stack once per function, so every partial derivative is exact to
rounding. Derivative axes are appended after the value axes.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass
from functools import lru_cache
from typing import Any

import jax

jax.config.update("jax_enable_x64", True)

import jax.numpy as jnp  # noqa: E402
import numpy as np  # noqa: E402
from jax.scipy.linalg import block_diag as _block_diag  # noqa: E402
from numpy.typing import ArrayLike, NDArray  # noqa: E402

FloatArray = NDArray[np.float64]
ChartFunction = Callable[[jax.Array], Any]

_CACHE_SIZE = 512


@dataclass(frozen=True, slots=True)
class Jet:
    """Value and partial derivatives of a field at one chart point.

    Attributes
    ----------
    point : numpy.ndarray
        Expansion point.
    derivatives : tuple[numpy.ndarray, ...]
        ``derivatives[k]`` holds all ``k``-th partials with shape
        ``shape + (dim,) * k``.
    """

    point: FloatArray
    derivatives: tuple[FloatArray, ...]

    @property
    def order(self) -> int:
        """Return the truncation order."""
        return len(self.derivatives) - 1

    @property
    def dim(self) -> int:
        """Return the number of chart variables."""
        return int(self.point.shape[0])

    @property
    def shape(self) -> tuple[int, ...]:
        """Return the shape of the expanded quantity."""
        return tuple(self.derivatives[0].shape)

    @property
    def value(self) -> FloatArray:
        """Return the value at the expansion point."""
        return self.derivatives[0]

    @property
    def d1(self) -> FloatArray:
        """Return first partials ``[..., i]``."""
        return self.derivative(1)

    @property
    def d2(self) -> FloatArray:
        """Return second partials ``[..., i, j]``."""
        return self.derivative(2)

    @property
    def d3(self) -> FloatArray:
        """Return third partials ``[..., i, j, k]``."""
        return self.derivative(3)

    def derivative(self, k: int) -> FloatArray:
        """Return the tensor of ``k``-th partial derivatives."""
        if not 0 <= k <= self.order:
            raise ValueError(f"jet of order {self.order} has no derivative {k}")
        return self.derivatives[k]

    def is_finite(self) -> bool:
        """Return whether every stored derivative is finite."""
        return all(bool(np.all(np.isfinite(block))) for block in self.derivatives)


def as_array(fn: ChartFunction) -> Callable[[jax.Array], jax.Array]:
    """Wrap ``fn`` so it always returns a float64 array."""

    def wrapped(x: jax.Array) -> jax.Array:
        return jnp.asarray(fn(x), dtype=jnp.float64)

    return wrapped


def nested_jacobians(
    fn: ChartFunction, order: int
) -> list[Callable[[jax.Array], jax.Array]]:
    """Return ``[fn, D fn, ..., D^order fn]`` built with :func:`jax.jacfwd`."""
    if order < 0:
        raise ValueError(f"jet order must be non-negative, got {order}")
    stages = [as_array(fn)]
    for _ in range(order):
        stages.append(jax.jacfwd(stages[-1]))
    return stages


@lru_cache(maxsize=_CACHE_SIZE)
def compiled_taylor(
    fn: ChartFunction, order: int
) -> Callable[[jax.Array], tuple[jax.Array, ...]]:
    """Return a jitted map from a point to all derivatives up to ``order``."""
    stages = nested_jacobians(fn, order)

    @jax.jit
    def expand(x: jax.Array) -> tuple[jax.Array, ...]:
        return tuple(stage(x) for stage in stages)

    return expand


def taylor(fn: ChartFunction, point: ArrayLike, order: int) -> Jet:
    """Expand a chart function to ``order`` at ``point``.

    Parameters
    ----------
    fn : Callable[[jax.Array], Any]
        Function of the coordinate vector written with :mod:`jax.numpy`.
    point : ArrayLike
        Chart point.
    order : int
        Truncation order.

    Returns
    -------
    Jet
        Value and partials.
    """
    values = np.asarray(point, dtype=np.float64).reshape(-1)
    blocks = compiled_taylor(fn, int(order))(jnp.asarray(values))
    return Jet(values, tuple(np.array(block, dtype=np.float64) for block in blocks))


def diagonal(entries: Sequence[Any]) -> jax.Array:
    """Return the diagonal matrix with the given traced or constant entries."""
    return jnp.diag(jnp.stack([jnp.asarray(e, dtype=jnp.float64) for e in entries]))


def block_diagonal(blocks: Sequence[Any]) -> jax.Array:
    """Return the block-diagonal matrix of square blocks."""
    return _block_diag(*(jnp.atleast_2d(jnp.asarray(b, jnp.float64)) for b in blocks))
