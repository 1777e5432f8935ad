"""One-dimensional reductions: closed families, integration and profiles.

Every reduction is written once as a :mod:`jax.numpy` right-hand side, so
the same code drives ``solve_ivp`` on floats and the derivatives of dense
profiles through :func:`jax.jacfwd`.
"""

from __future__ import annotations

import csv
import logging
import math
from collections.abc import Callable, Mapping
from dataclasses import dataclass
from enum import StrEnum
from functools import lru_cache
from pathlib import Path
from typing import Any

import jax
import jax.numpy as jnp
import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline

from rhlab.config import get_settings
from rhlab.exceptions import (
    BadParams,
    MonotonicityViolated,
    PointExcluded,
    RadicandNegative,
    ReportIoError,
    SignMismatch,
    StepUnderflow,
    ZeroCrossing,
)
from rhlab.geometry.curvature import curvature_pack
from rhlab.geometry.fields import ChartDomain, MetricField, ScalarField
from rhlab.geometry.jet import diagonal, nested_jacobians
from rhlab.services.warped import CaseTag, WarpedSpec
from rhlab.types import OdeKind, OdeProfile

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]
RightHandSide = Callable[[Any, Any], jax.Array]

POSITIVITY_FLOOR = 1e-6
POISSON_START = 1e-2
CLOSED_FAMILY_SPACING = 0.002
# integrator tolerance relative to the requested one
CONTROL_FACTOR = 0.05
# square-root branches meet zero tangentially; stop just above it
RADICAND_FLOOR = 1e-12
_GRID_SLACK = 1e-12
_SLOPE_FLOOR = 1e-12

RADICAND_EVENT = "radicand -> 0"
ZERO_EVENT = "u -> 0"


class GradientProfile(StrEnum):
    """First-order profiles of gradient-type reductions."""

    CIRC = "circ"
    SINH = "sinh"
    EXP = "exp"
    COSH = "cosh"


# y'^2 - s y^2 for circ/sinh/cosh, y' - y for exp
FIRST_INTEGRALS: dict[GradientProfile, float] = {
    GradientProfile.CIRC: 1.0,
    GradientProfile.SINH: 1.0,
    GradientProfile.EXP: 0.0,
    GradientProfile.COSH: -1.0,
}

CLOSED_FAMILY_SIGNS: dict[str, int] = {"a1": 1, "b1": 0, "c1": -1, "d1": -1, "e1": -1}


@dataclass(frozen=True, slots=True)
class OdeSystem:
    """Right-hand side of a reduction in first-order form.

    Attributes
    ----------
    kind : OdeKind
        Reduction kind.
    order : int
        State dimension, ``1`` for ``(u,)`` or ``2`` for ``(u, u')``.
    rhs : Callable[[Any, Any], jax.Array]
        ``(t, state) -> state'`` written with :mod:`jax.numpy`.
    radicand : Callable[[Any, Any], jax.Array] | None
        Quantity under the square root for first-order kinds.
    positive : bool
        Whether ``u`` must stay above :data:`POSITIVITY_FLOOR`.
    nonzero : bool
        Whether ``u`` must not cross zero.
    """

    kind: OdeKind
    order: int
    rhs: RightHandSide
    radicand: RightHandSide | None = None
    positive: bool = False
    nonzero: bool = False


def _root(value: Any, branch: float) -> jax.Array:
    # zero outside the admissible region, with a finite derivative there
    inside = value > 0.0
    safe = jnp.where(inside, value, 1.0)
    return jnp.where(inside, branch * jnp.sqrt(safe), 0.0)


def _number(params: Mapping[str, Any], key: str, default: float | None = None) -> float:
    if key not in params:
        if default is None:
            raise BadParams(f"missing ODE parameter {key!r}")
        return default
    try:
        return float(params[key])
    except (TypeError, ValueError) as exc:
        raise BadParams(f"ODE parameter {key!r} must be a number") from exc


def _first_order(
    kind: OdeKind, radicand: RightHandSide, branch: float, **flags: bool
) -> OdeSystem:
    def rhs(t: Any, y: Any) -> jax.Array:
        return jnp.stack([_root(radicand(t, y), branch)])

    return OdeSystem(kind, 1, rhs, radicand, **flags)


def ode_system(kind: OdeKind, params: Mapping[str, Any]) -> OdeSystem:
    """Build the right-hand side of a reduction.

    Parameters
    ----------
    kind : OdeKind
        Reduction kind.
    params : Mapping[str, Any]
        ``n2`` and ``mu1`` for the base equation; ``mu1`` and ``C`` for its
        first-order form with ``n2 = 2``; ``mu1``, ``mu2`` and ``C`` for the
        fiber equation; ``profile`` for gradient kinds; ``mu1`` for line
        warps. ``branch`` picks the sign of square roots.

    Returns
    -------
    OdeSystem
        The system.

    Raises
    ------
    BadParams
        If a parameter is missing or invalid.
    """
    branch = _number(params, "branch", 1.0)
    if branch not in (1.0, -1.0):
        raise BadParams("branch must be +1 or -1")
    if kind is OdeKind.BASE_SECOND_ORDER:
        n2 = int(_number(params, "n2"))
        if n2 < 1:
            raise BadParams("fiber dimension n2 must be at least 1")
        mu1 = _number(params, "mu1")
        curvature = 0.5 * (n2 - 2)

        def base(t: Any, y: Any) -> jax.Array:
            u, v = y[0], y[1]
            return jnp.stack([v, (0.5 * mu1 - curvature * v * v) / u])

        return OdeSystem(kind, 2, base, positive=True)
    if kind is OdeKind.BASE_FIRST_ORDER:
        mu1 = _number(params, "mu1")
        constant = _number(params, "C")

        def base_radicand(t: Any, y: Any) -> jax.Array:
            return mu1 * jnp.log(y[0]) + constant

        return _first_order(kind, base_radicand, branch, positive=True)
    if kind in (OdeKind.LINE_WARP, OdeKind.CLOSED_FAMILY):
        mu1 = _number(params, "mu1")

        def line(t: Any, y: Any) -> jax.Array:
            u, v = y[0], y[1]
            return jnp.stack([v, (v * v + mu1) / u])

        return OdeSystem(kind, 2, line, positive=True)
    if kind is OdeKind.FIBER_FIRST_ORDER:
        mu1 = _number(params, "mu1")
        mu2 = _number(params, "mu2")
        constant = _number(params, "C")

        def fiber_radicand(t: Any, y: Any) -> jax.Array:
            u = y[0]
            return 0.5 * mu2 + (
                0.5 * (3.0 * mu1 - constant) - mu1 * jnp.log(jnp.abs(u))
            ) * u * u

        return _first_order(kind, fiber_radicand, branch, nonzero=True)
    if kind is OdeKind.GRADIENT:
        try:
            profile = GradientProfile(str(params.get("profile", "")))
        except ValueError as exc:
            name = params.get("profile")
            raise BadParams(f"unknown gradient profile {name!r}") from exc
        if profile is GradientProfile.EXP:
            return OdeSystem(kind, 1, lambda t, y: jnp.stack([y[0]]))
        sign = {GradientProfile.CIRC: -1.0, GradientProfile.SINH: 1.0}.get(profile)

        def gradient_radicand(t: Any, y: Any) -> jax.Array:
            u = y[0]
            if sign is None:
                return u * u - 1.0
            return sign * u * u + 1.0

        return _first_order(kind, gradient_radicand, branch)
    if kind is OdeKind.POISSON_RADIAL:

        def poisson(t: Any, y: Any) -> jax.Array:
            v = y[1]
            return jnp.stack([v, 2.0 - 2.0 * jnp.cosh(t) / jnp.sinh(t) * v])

        return OdeSystem(kind, 2, poisson)
    raise BadParams(f"unsupported ODE kind {kind!r}")


def _tolerance(tol: float | None) -> float:
    value = get_settings().ode_tolerance if tol is None else float(tol)
    if not 1e-12 <= value <= 1e-6:
        raise BadParams(f"ODE tolerance {value:g} outside [1e-12, 1e-6]")
    return value


def integrate(
    kind: OdeKind | str,
    params: Mapping[str, Any],
    initial: ArrayLike,
    t_span: tuple[float, float],
    tol: float | None = None,
) -> OdeProfile:
    """Integrate a reduction with an embedded Runge-Kutta 4(5) scheme.

    Parameters
    ----------
    kind : OdeKind | str
        Reduction kind.
    params : Mapping[str, Any]
        Parameters, see :func:`ode_system`.
    initial : ArrayLike
        ``(u0,)`` for first-order kinds, ``(u0, u0')`` otherwise.
    t_span : tuple[float, float]
        Start and end parameter; the end may precede the start.
    tol : float | None, default=None
        Requested tolerance in ``[1e-12, 1e-6]``. The integrator runs at
        ``CONTROL_FACTOR * tol``.

    Returns
    -------
    OdeProfile
        Grid, values, derivatives and statistics. ``stats["boundary"]``
        names the event that stopped integration early, if any.

    Raises
    ------
    RadicandNegative
        If the initial data lies outside the admissible region.
    StepUnderflow
        If the integrator fails.
    """
    kind = OdeKind(kind)
    system = ode_system(kind, params)
    tolerance = _tolerance(tol)
    y0 = np.asarray(initial, dtype=np.float64).reshape(-1)
    if y0.size != system.order:
        raise BadParams(f"{kind} needs {system.order} initial values, got {y0.size}")
    t0, t1 = float(t_span[0]), float(t_span[1])
    if t0 == t1:
        raise BadParams("integration interval is empty")
    if system.positive and y0[0] <= POSITIVITY_FLOOR:
        raise BadParams(f"{kind} needs u0 > {POSITIVITY_FLOOR:g}")
    if system.nonzero and y0[0] == 0.0:
        raise BadParams(f"{kind} needs u0 != 0")
    rhs = jax.jit(system.rhs)
    radicand = jax.jit(system.radicand) if system.radicand is not None else None
    if radicand is not None:
        start = float(radicand(t0, y0))
        if start < 0.0:
            raise RadicandNegative(f"initial radicand {start:.3g}")

    events: list[Callable[[float, FloatArray], float]] = []
    names: list[str] = []
    if radicand is not None:

        def radicand_event(t: float, y: FloatArray) -> float:
            return float(radicand(t, y)) - RADICAND_FLOOR

        radicand_event.terminal = True  # type: ignore[attr-defined]
        radicand_event.direction = -1  # type: ignore[attr-defined]
        events.append(radicand_event)
        names.append(RADICAND_EVENT)
    if system.positive or system.nonzero:
        floor = POSITIVITY_FLOOR if system.positive else 0.0

        def zero_event(t: float, y: FloatArray) -> float:
            return float(y[0] - floor)

        zero_event.terminal = True  # type: ignore[attr-defined]
        direction = -1 if system.positive else 0
        zero_event.direction = direction  # type: ignore[attr-defined]
        events.append(zero_event)
        names.append(ZERO_EVENT)

    def fun(t: float, y: FloatArray) -> FloatArray:
        return np.asarray(rhs(t, y), dtype=np.float64)

    control = tolerance * CONTROL_FACTOR
    solution = solve_ivp(
        fun,
        (t0, t1),
        y0,
        method="RK45",
        rtol=control,
        atol=control,
        max_step=get_settings().ode_max_step,
        events=events or None,
    )
    if solution.status == -1:
        raise StepUnderflow(str(solution.message))
    boundary = None
    if solution.status == 1:
        for name, times in zip(names, solution.t_events):
            if len(times):
                boundary = name
                break
    grid = np.asarray(solution.t, dtype=np.float64)
    states = np.asarray(solution.y, dtype=np.float64)
    if grid[-1] < grid[0]:
        grid, states = grid[::-1], states[:, ::-1]
    keep = np.concatenate([[True], np.diff(grid) > 0.0])
    grid, states = grid[keep], states[:, keep]
    if system.order == 2:
        du = states[1].copy()
    else:
        du = _slopes(system.rhs, grid, states.T)[:, 0]
    echoed = dict(params)
    echoed.update(t0=t0, tol=tolerance)
    stats = {
        "steps": int(grid.size - 1),
        "nfev": int(solution.nfev),
        "boundary": boundary,
        "t_end": float(solution.t[-1]),
        "control_tol": control,
    }
    if boundary is not None:
        logger.info(
            "integration stopped at boundary",
            extra={"kind": str(kind), "boundary": boundary, "t": stats["t_end"]},
        )
    return OdeProfile(grid, states[0].copy(), du, kind, echoed, stats)


def _slopes(rhs: RightHandSide, times: ArrayLike, states: ArrayLike) -> FloatArray:
    batched = jax.jit(jax.vmap(rhs))
    values = batched(
        jnp.asarray(times, dtype=jnp.float64), jnp.asarray(states, dtype=jnp.float64)
    )
    return np.array(values, dtype=np.float64)


def _states(profile: OdeProfile, system: OdeSystem) -> FloatArray:
    if system.order == 2:
        return np.column_stack([profile.u, profile.du])
    return profile.u.reshape(-1, 1)


class ProfileField:
    """Dense, differentiable view of a sampled profile.

    Values between grid nodes come from the cubic Hermite interpolant.
    Derivatives follow the reduction itself: the tangent of the state is the
    right-hand side at the interpolated state, so :func:`jax.jacfwd` of
    :meth:`value` recovers every higher derivative of ``u``.

    Parameters
    ----------
    profile : OdeProfile
        Sampled solution.
    """

    def __init__(self, profile: OdeProfile) -> None:
        if profile.grid.size < 2:
            raise BadParams("profile needs at least two grid nodes")
        self.profile = profile
        self.system = ode_system(profile.kind, profile.params)
        states = _states(profile, self.system)
        slopes = _slopes(self.system.rhs, profile.grid, states)
        self.spline = CubicHermiteSpline(profile.grid, states, slopes, axis=0)
        self._trajectory = self._build_trajectory()
        self._components: dict[int, Callable[[Any], jax.Array]] = {}
        self._compiled: dict[int, Callable[[Any], jax.Array]] = {}

    @property
    def lower(self) -> float:
        """Return the first grid node."""
        return float(self.profile.grid[0])

    @property
    def upper(self) -> float:
        """Return the last grid node."""
        return float(self.profile.grid[-1])

    def domain(self) -> ChartDomain:
        """Return the grid interval as a one-dimensional chart."""
        return ChartDomain.box([self.lower], [self.upper])

    def _build_trajectory(self) -> Callable[[Any], jax.Array]:
        spline, lower, upper = self.spline, self.lower, self.upper
        rhs = self.system.rhs
        shape = jax.ShapeDtypeStruct((self.system.order,), jnp.float64)

        def interpolate(t: np.ndarray) -> np.ndarray:
            clamped = np.clip(np.asarray(t, dtype=np.float64), lower, upper)
            return np.asarray(spline(clamped), dtype=np.float64)

        @jax.custom_jvp
        def trajectory(t: Any) -> jax.Array:
            return jax.pure_callback(interpolate, shape, t, vmap_method="sequential")

        @trajectory.defjvp
        def trajectory_jvp(
            primals: tuple[Any], tangents: tuple[Any]
        ) -> tuple[jax.Array, jax.Array]:
            (t,), (t_dot,) = primals, tangents
            state = trajectory(t)
            return state, rhs(t, state) * t_dot

        return trajectory

    def state(self, t: float) -> FloatArray:
        """Return the interpolated state at ``t``.

        Raises
        ------
        PointExcluded
            If ``t`` lies outside the grid.
        """
        self._require(t)
        return np.asarray(self.spline(min(max(t, self.lower), self.upper)))

    def _require(self, t: float) -> None:
        if not self.lower - _GRID_SLACK <= t <= self.upper + _GRID_SLACK:
            raise PointExcluded(
                f"t = {t:g} outside profile grid [{self.lower:g}, {self.upper:g}]"
            )

    def _component(self, derivative: int) -> Callable[[Any], jax.Array]:
        if derivative not in self._components:
            trajectory = self._trajectory
            stages = nested_jacobians(lambda t: trajectory(t)[0], derivative)
            self._components[derivative] = stages[-1]
        return self._components[derivative]

    def value(self, t: Any, derivative: int = 0) -> Any:
        """Return ``u^(derivative)(t)``.

        Parameters
        ----------
        t : float | jax.Array
            Parameter value; traced values are differentiable.
        derivative : int, default=0
            Derivative of ``u`` to evaluate.

        Returns
        -------
        float | jax.Array
            A float for plain numbers, an array otherwise.

        Raises
        ------
        PointExcluded
            If a plain ``t`` lies outside the grid.
        """
        if isinstance(t, (int, float, np.integer, np.floating)):
            self._require(float(t))
            if derivative not in self._compiled:
                self._compiled[derivative] = jax.jit(self._component(derivative))
            compiled = self._compiled[derivative]
            return float(compiled(jnp.asarray(float(t), dtype=jnp.float64)))
        return self._component(derivative)(t)

    def scalar(
        self, axis: int = 0, derivative: int = 0, label: str = "u"
    ) -> ScalarField:
        """Return ``u^(derivative)(x[axis])`` as a scalar field."""
        return ScalarField(lambda x: self.value(x[axis], derivative), label)


def ode_residual(profile: OdeProfile) -> float:
    """Return the defect of the Hermite interpolant at interval midpoints.

    For first-order kinds the stored derivatives are also compared with the
    right-hand side at the nodes.

    Parameters
    ----------
    profile : OdeProfile
        Sampled solution.

    Returns
    -------
    float
        Largest defect.
    """
    field = ProfileField(profile)
    grid = profile.grid
    middle = 0.5 * (grid[:-1] + grid[1:])
    values = field.spline(middle)
    slopes = field.spline(middle, 1)
    expected = _slopes(field.system.rhs, middle, values)
    defect = float(np.max(np.abs(slopes - expected)))
    if field.system.order == 1:
        nodes = _slopes(field.system.rhs, grid, profile.u.reshape(-1, 1))[:, 0]
        defect = max(defect, float(np.max(np.abs(profile.du - nodes))))
    return defect


# Closed families


def _check_family(kind: str, amplitude: float, mu1: float) -> None:
    required = CLOSED_FAMILY_SIGNS.get(kind)
    if required is None:
        raise BadParams(f"unknown closed family {kind!r}")
    if amplitude <= 0.0:
        raise BadParams(f"family amplitude must be positive, got {amplitude:g}")
    sign = int(np.sign(mu1))
    if sign != required:
        raise SignMismatch(f"family {kind} needs sign(mu1) = {required}, got {mu1:g}")


def closed_family_jet(
    kind: str, amplitude: float, phase: float, mu1: float, t: Any
) -> jax.Array:
    """Evaluate a closed-form solution of ``-u u'' + u'^2 = -mu1``.

    Parameters
    ----------
    kind : str
        ``a1`` (cosh, ``mu1 > 0``), ``b1`` (exponential, ``mu1 = 0``),
        ``c1`` (cos), ``d1`` (linear) or ``e1`` (sinh), all three with
        ``mu1 < 0``.
    amplitude : float
        ``A > 0``; unused by ``d1``.
    phase : float
        Phase, or the exponential rate for ``b1`` and the offset for ``d1``.
    mu1 : float
        Constant of the equation.
    t : float | jax.Array
        Parameter value, possibly traced.

    Returns
    -------
    jax.Array
        ``u(t)``.

    Raises
    ------
    SignMismatch
        If ``mu1`` has the wrong sign for the family.
    """
    _check_family(kind, amplitude, mu1)
    t = jnp.asarray(t, dtype=jnp.float64)
    if kind == "a1":
        return amplitude * jnp.cosh(t * (math.sqrt(mu1) / amplitude) + phase)
    if kind == "b1":
        return amplitude * jnp.exp(t * phase)
    rate = math.sqrt(-mu1)
    if kind == "c1":
        return amplitude * jnp.cos(t * (rate / amplitude) + phase)
    if kind == "d1":
        return t * rate + phase
    return amplitude * jnp.sinh(t * (rate / amplitude) + phase)


def _family_values(
    kind: str, amplitude: float, phase: float, mu1: float, times: ArrayLike
) -> tuple[FloatArray, FloatArray]:
    _check_family(kind, amplitude, mu1)

    def pair(t: jax.Array) -> tuple[jax.Array, jax.Array]:
        return jax.jvp(
            lambda s: closed_family_jet(kind, amplitude, phase, mu1, s),
            (t,),
            (jnp.ones_like(t),),
        )

    grid = jnp.asarray(np.atleast_1d(np.asarray(times, dtype=np.float64)))
    values, slopes = jax.vmap(pair)(grid)
    return np.array(values, dtype=np.float64), np.array(slopes, dtype=np.float64)


def closed_family(
    kind: str, amplitude: float, phase: float, mu1: float, t: float
) -> tuple[float, float]:
    """Return ``(u(t), u'(t))`` of a closed family."""
    values, slopes = _family_values(kind, amplitude, phase, mu1, [t])
    return float(values[0]), float(slopes[0])


def closed_family_residual(
    kind: str, amplitude: float, phase: float, mu1: float, t: float
) -> float:
    """Return ``|-u u'' + u'^2 + mu1|`` at ``t``."""
    stages = nested_jacobians(
        lambda s: closed_family_jet(kind, amplitude, phase, mu1, s), 2
    )
    point = jnp.asarray(float(t), dtype=jnp.float64)
    u, du, ddu = (float(stage(point)) for stage in stages)
    return abs(-u * ddu + du * du + mu1)


def sample_closed_family(
    kind: str,
    amplitude: float,
    phase: float,
    mu1: float,
    t_span: tuple[float, float],
    spacing: float = CLOSED_FAMILY_SPACING,
) -> OdeProfile:
    """Sample a closed family on a uniform grid.

    The profile is checked against the line-warp equation
    ``u'' = (u'^2 + mu1) / u`` by :func:`ode_residual`.
    """
    lower, upper = sorted((float(t_span[0]), float(t_span[1])))
    count = max(2, int(math.ceil((upper - lower) / spacing)) + 1)
    grid = np.linspace(lower, upper, count)
    u, du = _family_values(kind, amplitude, phase, mu1, grid)
    params = {"family": kind, "A": amplitude, "phi": phase, "mu1": mu1, "t0": lower}
    stats = {"steps": count - 1, "nfev": count, "boundary": None, "t_end": upper}
    return OdeProfile(grid, u, du, OdeKind.CLOSED_FAMILY, params, stats)


def integrate_closed_family(
    kind: str,
    amplitude: float,
    phase: float,
    mu1: float,
    t_span: tuple[float, float],
    tol: float | None = None,
) -> OdeProfile:
    """Integrate the line-warp equation from closed-family initial data."""
    start = float(t_span[0])
    initial = closed_family(kind, amplitude, phase, mu1, start)
    params = {"mu1": mu1, "family": kind, "A": amplitude, "phi": phase}
    return integrate(OdeKind.LINE_WARP, params, initial, t_span, tol)


def closed_form_values(profile: OdeProfile) -> FloatArray | None:
    """Return the known closed-form solution on the profile grid, if any.

    Covers gradient profiles, line warps started on a closed family, the
    base equation and its first-order form with ``mu1 = 0`` and the regular
    Poisson profile.
    """
    params = profile.params
    grid = profile.grid
    t0 = float(params.get("t0", grid[0]))
    line_kinds = (OdeKind.LINE_WARP, OdeKind.CLOSED_FAMILY)
    if profile.kind in line_kinds and "family" in params:
        family = str(params["family"])
        args = (float(params["A"]), float(params["phi"]), float(params["mu1"]))
        return _family_values(family, *args, grid)[0]
    if profile.kind is OdeKind.GRADIENT:
        y0 = float(np.interp(t0, grid, profile.u))
        shifted = grid - t0
        match GradientProfile(str(params["profile"])):
            case GradientProfile.CIRC:
                return np.sin(shifted + math.asin(y0))
            case GradientProfile.SINH:
                return np.sinh(shifted + math.asinh(y0))
            case GradientProfile.EXP:
                return y0 * np.exp(shifted)
            case GradientProfile.COSH:
                return np.cosh(shifted + math.acosh(y0))
    if profile.kind is OdeKind.BASE_SECOND_ORDER and float(params["mu1"]) == 0.0:
        n2 = int(params["n2"])
        index = int(np.argmin(np.abs(grid - t0)))
        u0, v0 = float(profile.u[index]), float(profile.du[index])
        rate = 0.5 * n2 * v0 * u0 ** (0.5 * n2 - 1.0)
        offset = u0 ** (0.5 * n2) - rate * grid[index]
        return (rate * grid + offset) ** (2.0 / n2)
    if profile.kind is OdeKind.BASE_FIRST_ORDER and float(params["mu1"]) == 0.0:
        index = int(np.argmin(np.abs(grid - t0)))
        slope = float(params.get("branch", 1.0)) * math.sqrt(float(params["C"]))
        return profile.u[index] + slope * (grid - grid[index])
    if profile.kind is OdeKind.POISSON_RADIAL and params.get("regular"):
        return grid / np.tanh(grid) - 1.0
    return None


def closed_form_deviation(profile: OdeProfile) -> float | None:
    """Return ``max |u - u_closed|`` or ``None`` without a closed form."""
    expected = closed_form_values(profile)
    if expected is None:
        return None
    return float(np.max(np.abs(profile.u - expected)))


def first_integral_deviation(profile: OdeProfile) -> float:
    """Return the drift of the conserved quantity of a gradient profile.

    Evaluated at the nodes and at interval midpoints of the interpolant.

    Raises
    ------
    BadParams
        If the profile is not of gradient kind.
    """
    if profile.kind is not OdeKind.GRADIENT:
        raise BadParams("first integrals exist for gradient profiles only")
    kind = GradientProfile(str(profile.params["profile"]))
    field = ProfileField(profile)
    grid = profile.grid
    middle = 0.5 * (grid[:-1] + grid[1:])
    y = np.concatenate([profile.u, field.spline(middle)[:, 0]])
    dy = np.concatenate([profile.du, field.spline(middle, 1)[:, 0]])
    match kind:
        case GradientProfile.CIRC:
            invariant = y * y + dy * dy
        case GradientProfile.EXP:
            invariant = dy - y
        case _:
            invariant = dy * dy - y * y
    return float(np.max(np.abs(invariant - FIRST_INTEGRALS[kind])))


@lru_cache(maxsize=8)
def poisson_profile(r_end: float, tol: float | None = None) -> OdeProfile:
    """Return the regular radial solution of ``u'' + 2 coth(r) u' = 2``.

    Integration starts at ``r = 1e-2`` from the series
    ``u = r^2/3 - r^4/45``.
    """
    r0 = POISSON_START
    initial = (r0**2 / 3.0 - r0**4 / 45.0, 2.0 * r0 / 3.0 - 4.0 * r0**3 / 45.0)
    return integrate(
        OdeKind.POISSON_RADIAL, {"regular": True}, initial, (r0, float(r_end)), tol
    )


# Reconstruction

_BASE_KINDS = (
    OdeKind.BASE_SECOND_ORDER,
    OdeKind.BASE_FIRST_ORDER,
    OdeKind.FIBER_FIRST_ORDER,
)


def _monotone(profile: OdeProfile) -> None:
    if np.any(profile.u <= 0.0):
        raise MonotonicityViolated("profile must stay positive")
    if np.any(profile.du <= 0.0):
        raise MonotonicityViolated("profile must be strictly increasing")


def _fiber_metric(sigma: str, lower: float, upper: float) -> MetricField:
    if sigma == "line":
        return MetricField(1, lambda x: np.eye(1), ChartDomain.box([lower], [upper]))
    if sigma == "circle":
        return MetricField(
            1,
            lambda x: np.eye(1),
            ChartDomain.box([0.0], [2.0 * math.pi]),
            periodic_axes=(True,),
            label="circle",
        )
    raise BadParams(f"fiber must be 'line' or 'circle', got {sigma!r}")


def _line_fiber_factor(mu1: float) -> ScalarField:
    # solves f'' = mu1 f on the fiber line
    if mu1 > 0.0:
        rate = math.sqrt(mu1)
        return ScalarField(lambda x: jnp.cosh(x[0] * rate), f"cosh({rate:g}s)")
    if mu1 < 0.0:
        rate = math.sqrt(-mu1)
        return ScalarField(lambda x: jnp.cos(x[0] * rate), f"cos({rate:g}s)")
    return ScalarField(lambda x: 1.0, "1")


def profile_to_warped(
    profile: OdeProfile, fiber_dim: int = 1, sigma: str = "line"
) -> WarpedSpec:
    """Rebuild a warped product from an increasing positive profile.

    Base-equation profiles (either form) and fiber-equation profiles give
    the surface ``dt^2 + rho(t)^2 ds^2`` with ``rho = u'/u'(t0)`` and
    ``f = u`` (case ``b``). Line-warp and closed-family profiles give
    ``dt^2 + u^2 ds^2`` with ``f = u`` (case ``a``).

    Parameters
    ----------
    profile : OdeProfile
        Sampled solution.
    fiber_dim : int, default=1
        Only one-dimensional fibers are rebuilt.
    sigma : str, default="line"
        ``"line"`` or ``"circle"``.

    Returns
    -------
    WarpedSpec
        Warped data whose base is the profile interval.

    Raises
    ------
    MonotonicityViolated
        If ``u`` or ``u'`` is not positive.
    """
    if fiber_dim != 1:
        raise BadParams("profile reconstruction builds one-dimensional fibers")
    _monotone(profile)
    field = ProfileField(profile)
    base = MetricField(1, lambda x: np.eye(1), field.domain(), label="dt^2")
    fiber = _fiber_metric(sigma, -1.0, 1.0)
    f1 = field.scalar(label="u")
    label = f"{profile.kind}:{sigma}"
    if profile.kind in (OdeKind.LINE_WARP, OdeKind.CLOSED_FAMILY):
        f2 = _line_fiber_factor(float(profile.params["mu1"]))
        return WarpedSpec(base, fiber, f1, f1, f2, CaseTag.A, label)
    if profile.kind not in _BASE_KINDS:
        raise BadParams(f"{profile.kind} profiles have no warped reconstruction")
    scale = float(profile.du[0])
    if scale <= _SLOPE_FLOOR:
        raise MonotonicityViolated("initial slope must be positive")
    warp = ScalarField(lambda x: field.value(x[0], 1) / scale, "u'/u'(t0)")
    f2 = ScalarField(lambda x: 1.0, "1")
    return WarpedSpec(base, fiber, warp, f1, f2, CaseTag.B, label)


def reconstruction_coefficient(profile: OdeProfile) -> float:
    """Return ``c`` in ``nabla^2 f = c f Ric`` satisfied by the rebuilt surface."""
    if profile.kind is OdeKind.BASE_SECOND_ORDER:
        n2 = int(profile.params["n2"])
        if n2 < 2:
            raise BadParams("the (0, n2)-Einstein form needs n2 >= 2")
        return 1.0 / (n2 - 1)
    if profile.kind is OdeKind.BASE_FIRST_ORDER:
        return 1.0
    if profile.kind in (OdeKind.LINE_WARP, OdeKind.CLOSED_FAMILY):
        return -1.0
    raise BadParams(f"{profile.kind} profiles have no Hessian-Ricci form")


def log_law_check(
    profile: OdeProfile, mu1: float, constant: float
) -> dict[str, float]:
    """Check the logarithmic law of a fiber-equation profile.

    On the surface ``dt^2 + (u'/u'(t0))^2 ds^2`` the scalar curvature must
    equal ``C + 2 mu1 ln|u|``. For a constant profile (``u'(t0) = 0``) the
    surface degenerates and ``2 (mu1 - u''/u)`` is compared instead.
    ``u'' = (mu1 - C/2 - mu1 ln|u|) u`` is checked at every node.

    Returns
    -------
    dict[str, float]
        ``scalar_law`` and ``second_derivative`` worst residuals.

    Raises
    ------
    ZeroCrossing
        If ``u`` vanishes on the grid.
    """
    if np.any(profile.u == 0.0) or np.any(np.sign(profile.u) != np.sign(profile.u[0])):
        raise ZeroCrossing("profile crosses zero")
    field = ProfileField(profile)
    slope0 = float(profile.du[0])
    surface = _surface(field, slope0) if abs(slope0) > _SLOPE_FLOOR else None
    scalar_law = 0.0
    second = 0.0
    for t in profile.grid:
        u, ddu = field.value(float(t), 0), field.value(float(t), 2)
        log_u = math.log(abs(u))
        second = max(second, abs(ddu - (mu1 - 0.5 * constant - mu1 * log_u) * u))
        if surface is not None:
            scal = curvature_pack(surface, [t, 0.0], order=2).scal
        else:
            scal = 2.0 * (mu1 - ddu / u)
        scalar_law = max(scalar_law, abs(scal - (constant + 2.0 * mu1 * log_u)))
    return {"scalar_law": scalar_law, "second_derivative": second}


def _surface(field: ProfileField, slope0: float) -> MetricField:
    def components(x: jax.Array) -> jax.Array:
        rho = field.value(x[0], 1) / slope0
        return diagonal([1.0, rho * rho])

    domain = ChartDomain.box([field.lower, -1.0], [field.upper, 1.0])
    return MetricField(2, components, domain, label="profile surface")


def write_profile_csv(profile: OdeProfile, path: Path) -> None:
    """Write ``t,u,du`` rows for a profile.

    Raises
    ------
    ReportIoError
        If the file cannot be written.
    """
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(["t", "u", "du"])
            writer.writerows(profile.to_rows())
    except OSError as exc:
        raise ReportIoError(f"cannot write profile {path}: {exc}") from exc
