"""Chart domains, metric fields and scalar fields."""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass, field, replace
from typing import Any

import jax
import jax.numpy as jnp
import numpy as np
from numpy.typing import ArrayLike, NDArray

from rhlab.exceptions import BadParams, NonFiniteValue, PointExcluded
from rhlab.geometry.jet import ChartFunction, Jet, taylor

FloatArray = NDArray[np.float64]
Predicate = Callable[[FloatArray], bool]
EndomorphismField = Callable[[FloatArray], FloatArray]
PointGuard = Callable[[FloatArray], None]

_BOX_SLACK = 1e-12


@dataclass(frozen=True, slots=True)
class Exclusion:
    """Named closed condition removing chart points.

    Attributes
    ----------
    name : str
        Human-readable condition such as ``"r <= 0.6"``.
    predicate : Callable[[numpy.ndarray], bool]
        Returns ``True`` for points that must not be used.
    """

    name: str
    predicate: Predicate

    def shifted(self, start: int, stop: int) -> Exclusion:
        """Return the exclusion acting on coordinates ``start:stop``.

        Parameters
        ----------
        start, stop : int
            Slice of a product chart holding this factor.

        Returns
        -------
        Exclusion
            Exclusion on the product chart.
        """
        predicate = self.predicate
        return Exclusion(self.name, lambda point: predicate(point[start:stop]))


@dataclass(frozen=True, slots=True)
class ChartDomain:
    """Coordinate box with exclusions.

    Attributes
    ----------
    lower : tuple[float, ...]
        Lower box corner.
    upper : tuple[float, ...]
        Upper box corner.
    exclusions : tuple[Exclusion, ...]
        Closed conditions removing points from the box.

    Raises
    ------
    BadParams
        If the corners differ in length or the box has zero volume.
    """

    lower: tuple[float, ...]
    upper: tuple[float, ...]
    exclusions: tuple[Exclusion, ...] = ()

    def __post_init__(self) -> None:
        if len(self.lower) != len(self.upper):
            raise BadParams("domain corners have different dimensions")
        if any(lo >= hi for lo, hi in zip(self.lower, self.upper)):
            raise BadParams("domain lower corner must lie below upper corner")

    @classmethod
    def box(cls, lower: Sequence[float], upper: Sequence[float]) -> ChartDomain:
        """Build a domain from corner sequences."""
        return cls(tuple(float(v) for v in lower), tuple(float(v) for v in upper))

    @property
    def dim(self) -> int:
        """Return the chart dimension."""
        return len(self.lower)

    def with_exclusions(self, *extra: Exclusion) -> ChartDomain:
        """Return a copy with additional exclusions."""
        return replace(self, exclusions=self.exclusions + tuple(extra))

    def product(self, other: ChartDomain) -> ChartDomain:
        """Return the domain of the product chart ``self x other``."""
        offset = self.dim
        shifted = tuple(rule.shifted(0, offset) for rule in self.exclusions)
        shifted += tuple(
            rule.shifted(offset, offset + other.dim) for rule in other.exclusions
        )
        return ChartDomain(self.lower + other.lower, self.upper + other.upper, shifted)

    def inside_box(self, point: ArrayLike) -> bool:
        """Return whether ``point`` lies in the closed box."""
        values = np.asarray(point, dtype=np.float64)
        if values.shape != (self.dim,):
            return False
        lower = np.asarray(self.lower) - _BOX_SLACK
        upper = np.asarray(self.upper) + _BOX_SLACK
        return bool(np.all(values >= lower) and np.all(values <= upper))

    def excluded_by(self, point: ArrayLike) -> str | None:
        """Return the name of the first exclusion matching ``point``."""
        values = np.asarray(point, dtype=np.float64)
        for rule in self.exclusions:
            if rule.predicate(values):
                return rule.name
        return None

    def admits(self, point: ArrayLike) -> bool:
        """Return whether ``point`` is an admissible sample."""
        return self.inside_box(point) and self.excluded_by(point) is None

    def require(self, point: ArrayLike) -> FloatArray:
        """Validate a point and return it as an array.

        Parameters
        ----------
        point : ArrayLike
            Chart point.

        Returns
        -------
        numpy.ndarray
            The point as a float vector.

        Raises
        ------
        PointExcluded
            If the point is outside the box or matches an exclusion.
        """
        values = np.asarray(point, dtype=np.float64).reshape(-1)
        if not self.inside_box(values):
            raise PointExcluded(f"point {values.tolist()} outside chart box")
        reason = self.excluded_by(values)
        if reason is not None:
            raise PointExcluded(f"point {values.tolist()} excluded by {reason}")
        return values


@dataclass(frozen=True, slots=True)
class ScalarField:
    """Differentiable function on a chart.

    Attributes
    ----------
    eval : Callable[[jax.Array], Any]
        Maps the coordinate vector ``x`` to the value, written with
        :mod:`jax.numpy`. May return a plain number for constant functions.
    label : str
        Display label.
    """

    eval: ChartFunction
    label: str = "f"

    def on(self, x: jax.Array) -> jax.Array:
        """Evaluate on a (possibly traced) coordinate vector."""
        return jnp.asarray(self.eval(x), dtype=jnp.float64)

    def jet(self, point: ArrayLike, order: int) -> Jet:
        """Return the jet of the field at ``point``.

        Parameters
        ----------
        point : ArrayLike
            Chart point.
        order : int
            Truncation order.

        Returns
        -------
        Jet
            Scalar jet.

        Raises
        ------
        NonFiniteValue
            If evaluation produced NaN or infinity.
        """
        result = taylor(self.eval, point, order)
        if result.shape != ():
            raise ValueError(f"scalar field {self.label} returned shape {result.shape}")
        if not result.is_finite():
            raise NonFiniteValue(
                f"{self.label} is not finite at {result.point.tolist()}"
            )
        return result

    def __call__(self, point: ArrayLike) -> float:
        return float(self.jet(point, 0).value)

    def scaled(self, factor: float) -> ScalarField:
        """Return ``factor * self``."""
        inner = self.eval
        return ScalarField(lambda x: inner(x) * factor, f"{factor:g}*{self.label}")


@dataclass(frozen=True, slots=True)
class MetricField:
    """Riemannian metric on a single chart.

    Attributes
    ----------
    dim : int
        Manifold dimension.
    components : Callable[[jax.Array], Any]
        Maps the coordinate vector to the ``(dim, dim)`` matrix of ``g_ij``.
    domain : ChartDomain
        Chart domain.
    periodic_axes : tuple[bool, ...]
        Axes identified periodically (circle and torus factors).
    label : str
        Display label.
    guard : Callable[[numpy.ndarray], None] | None
        Check run on concrete points before any evaluation; raises when the
        components are not defined there.
    """

    dim: int
    components: ChartFunction
    domain: ChartDomain
    periodic_axes: tuple[bool, ...] = field(default=())
    label: str = "g"
    guard: PointGuard | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.domain.dim != self.dim:
            raise ValueError("metric and domain dimensions differ")
        if not self.periodic_axes:
            object.__setattr__(self, "periodic_axes", (False,) * self.dim)

    def check(self, point: ArrayLike) -> FloatArray:
        """Run the guard on ``point`` and return it as a float vector."""
        values = np.asarray(point, dtype=np.float64).reshape(-1)
        if self.guard is not None:
            self.guard(values)
        return values

    def jet(self, point: ArrayLike, order: int) -> Jet:
        """Return the jet of ``g_ij`` at ``point``.

        Parameters
        ----------
        point : ArrayLike
            Chart point.
        order : int
            Truncation order.

        Returns
        -------
        Jet
            Matrix jet of shape ``(dim, dim)``.

        Raises
        ------
        NonFiniteValue
            If evaluation produced NaN or infinity.
        """
        g = taylor(self.components, self.check(point), order)
        if g.shape != (self.dim, self.dim):
            raise ValueError(f"metric {self.label} returned shape {g.shape}")
        if not g.is_finite():
            raise NonFiniteValue(f"{self.label} is not finite at {g.point.tolist()}")
        return g

    def matrix(self, point: ArrayLike) -> FloatArray:
        """Return ``g_ij`` at ``point``."""
        return self.jet(point, 0).value.copy()

    def scaled(self, factor: float) -> MetricField:
        """Return the metric ``factor**2 * g``."""
        inner = self.components
        square = float(factor) ** 2
        return replace(
            self,
            components=lambda x: jnp.asarray(inner(x), dtype=jnp.float64) * square,
            label=f"{factor:g}^2*{self.label}",
        )


def evaluate_jet(
    target: ScalarField | MetricField,
    point: ArrayLike,
    *,
    order: int = 3,
    domain: ChartDomain | None = None,
) -> Jet:
    """Evaluate a field and its partial derivatives at a chart point.

    Parameters
    ----------
    target : ScalarField | MetricField
        Field to expand.
    point : ArrayLike
        Chart point.
    order : int, default=3
        Truncation order.
    domain : ChartDomain | None, default=None
        Domain to validate against. Metric fields use their own domain when
        omitted.

    Returns
    -------
    Jet
        Jet of the field.

    Raises
    ------
    PointExcluded
        If the point is not admissible.
    NonFiniteValue
        If evaluation produced NaN or infinity.
    """
    if domain is None and isinstance(target, MetricField):
        domain = target.domain
    values = np.asarray(point, dtype=np.float64).reshape(-1)
    if domain is not None:
        values = domain.require(values)
    return target.jet(values, order)


@dataclass(frozen=True, slots=True)
class Space:
    """Model space without a distinguished function.

    Attributes
    ----------
    name : str
        Catalog space name.
    metric : MetricField
        Metric on the chart.
    complex_structure : EndomorphismField | None
        Optional almost-complex structure ``J`` evaluated at chart points.
    params : dict[str, Any]
        Parameters the space was built with.
    factors : tuple[Space, ...]
        Factor spaces of a product, in coordinate order.
    """

    name: str
    metric: MetricField
    complex_structure: EndomorphismField | None = None
    params: dict[str, Any] = field(default_factory=dict)
    factors: tuple[Space, ...] = ()

    @property
    def dim(self) -> int:
        """Return the manifold dimension."""
        return self.metric.dim


@dataclass(frozen=True, slots=True)
class RHInstance:
    """Metric and candidate solution of the Ricci-Hessian equation.

    Attributes
    ----------
    metric : MetricField
        Metric.
    f : ScalarField
        Candidate solution.
    complex_structure : EndomorphismField | None
        Optional almost-complex structure ``J``.
    label : str
        Display label.
    """

    metric: MetricField
    f: ScalarField
    complex_structure: EndomorphismField | None = None
    label: str = "instance"

    @property
    def dim(self) -> int:
        """Return the manifold dimension."""
        return self.metric.dim

    @property
    def domain(self) -> ChartDomain:
        """Return the chart domain of the metric."""
        return self.metric.domain

    def scaled(self, factor: float) -> RHInstance:
        """Return the instance with metric ``factor**2 * g`` and the same ``f``."""
        return replace(
            self, metric=self.metric.scaled(factor), label=f"{self.label}@{factor:g}"
        )
