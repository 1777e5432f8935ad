"""Named model spaces, explicit solutions and catalog entries."""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field
from typing import Any

import jax
import jax.numpy as jnp
import numpy as np

from rhlab.config import get_settings
from rhlab.exceptions import BadParams, IncompatiblePair, UnknownEntry

from rhlab.geometry.fields import (
    ChartDomain,
    Exclusion,
    MetricField,
    RHInstance,
    ScalarField,
    Space,
)
from rhlab.geometry.jet import block_diagonal, diagonal

logger = logging.getLogger(__name__)

Params = Mapping[str, Any]
SpaceBuilder = Callable[[Params], Space]
SolutionBuilder = Callable[[Space, Params], ScalarField]

TWO_PI = 2.0 * math.pi
HARMONIC_CHOICES = ("linear", "x1x2", "saddle")
LINEAR_HARMONIC = (0.3, -0.2, 0.5)


def _param(params: Params, key: str, default: Any, kind: type = float) -> Any:
    value = params.get(key, default)
    try:
        return kind(value)
    except (TypeError, ValueError) as exc:
        raise BadParams(f"parameter {key}={value!r} is not {kind.__name__}") from exc


def _positive(params: Params, key: str, default: float) -> float:
    value = _param(params, key, default)
    if not value > 0.0:
        raise BadParams(f"parameter {key} must be positive, got {value}")
    return value


def _dimension(params: Params, default: int) -> int:
    n = _param(params, "n", default, int)
    if n < 1:
        raise BadParams(f"dimension must be at least 1, got {n}")
    return n


def _power(base: jax.Array, exponent: float) -> jax.Array:
    if float(exponent).is_integer():
        return base ** int(exponent)
    return jnp.power(base, exponent)


def standard_complex_structure(n: int) -> np.ndarray:
    """Return the constant complex structure ``J e_2k = e_2k+1`` on ``R^n``."""
    structure = np.zeros((n, n))
    for k in range(0, n, 2):
        structure[k + 1, k] = 1.0
        structure[k, k + 1] = -1.0
    return structure


def _flat(name: str, n: int, domain: ChartDomain, periodic: tuple[bool, ...]) -> Space:
    identity = np.eye(n)
    structure = standard_complex_structure(n) if n % 2 == 0 else None
    metric = MetricField(
        dim=n,
        components=lambda x: identity,
        domain=domain,
        periodic_axes=periodic,
        label=name,
    )
    return Space(
        name=name,
        metric=metric,
        complex_structure=(lambda _: structure) if structure is not None else None,
        params={"n": n},
    )


def _euclidean(params: Params) -> Space:
    n = _dimension(params, 2)
    lower = _param(params, "lower", -1.0)
    upper = _param(params, "upper", 1.0)
    if not lower < upper:
        raise BadParams("euclidean box needs lower < upper")
    space = _flat("euclidean", n, ChartDomain.box([lower] * n, [upper] * n), ())
    space.params.update(lower=lower, upper=upper)
    return space


def _flat_torus(params: Params) -> Space:
    n = _dimension(params, 2)
    return _flat(
        "flat_torus", n, ChartDomain.box([0.0] * n, [TWO_PI] * n), (True,) * n
    )


def _cylinder(params: Params) -> Space:
    half = _positive(params, "half_length", 1.0)
    return _flat(
        "cylinder", 2, ChartDomain.box([-half, 0.0], [half, TWO_PI]), (False, True)
    )


def _sphere2(params: Params) -> Space:
    radius = _positive(params, "radius", 1.0)
    margin = get_settings().exclusion_margin
    square = radius**2

    def components(x: jax.Array) -> jax.Array:
        s = jnp.sin(x[0])
        return diagonal([square, square * s * s])

    def structure(point: np.ndarray) -> np.ndarray:
        s = math.sin(point[0])
        return np.array([[0.0, -s], [1.0 / s, 0.0]])

    metric = MetricField(
        dim=2,
        components=components,
        domain=ChartDomain.box([margin, 0.0], [math.pi - margin, TWO_PI]),
        periodic_axes=(False, True),
        label="sphere2",
    )
    return Space("sphere2", metric, structure, {"radius": radius})


def _sphere3(params: Params) -> Space:
    radius = _positive(params, "radius", 1.0)
    margin = get_settings().exclusion_margin
    square = radius**2

    def components(x: jax.Array) -> jax.Array:
        s_chi = jnp.sin(x[0])
        s_theta = jnp.sin(x[1])
        polar = s_chi * s_chi
        return diagonal([square, square * polar, square * polar * s_theta * s_theta])

    metric = MetricField(
        dim=3,
        components=components,
        domain=ChartDomain.box(
            [margin, margin, 0.0], [math.pi - margin, math.pi - margin, TWO_PI]
        ),
        periodic_axes=(False, False, True),
        label="sphere3",
    )
    return Space("sphere3", metric, None, {"radius": radius})


def _hyperbolic2_halfplane(params: Params) -> Space:
    lower = _positive(params, "y_min", 0.25)
    upper = _param(params, "y_max", 2.0)
    if not upper > lower:
        raise BadParams("half-plane chart needs y_max > y_min")
    structure = np.array([[0.0, -1.0], [1.0, 0.0]])

    def components(x: jax.Array) -> jax.Array:
        weight = 1.0 / (x[1] * x[1])
        return diagonal([weight, weight])

    metric = MetricField(
        dim=2,
        components=components,
        domain=ChartDomain.box([-1.0, lower], [1.0, upper]),
        label="hyperbolic2_halfplane",
    )
    return Space("hyperbolic2_halfplane", metric, lambda _: structure, {})


def _hyperbolic2_warped(params: Params) -> Space:
    half = _positive(params, "half_width", 1.0)

    def components(x: jax.Array) -> jax.Array:
        return diagonal([1.0, jnp.exp(2.0 * x[0])])

    def structure(point: np.ndarray) -> np.ndarray:
        grow = math.exp(point[0])
        return np.array([[0.0, -grow], [1.0 / grow, 0.0]])

    metric = MetricField(
        dim=2,
        components=components,
        domain=ChartDomain.box([-half, -half], [half, half]),
        label="hyperbolic2_warped",
    )
    return Space("hyperbolic2_warped", metric, structure, {"half_width": half})


def _schwarzschild3(params: Params) -> Space:
    mass = _positive(params, "m", 1.0)
    inner = 0.6 * mass
    outer = 10.0 * mass
    identity = np.eye(3)

    def components(x: jax.Array) -> jax.Array:
        radius = jnp.sqrt((x * x).sum())
        conformal = 1.0 + (mass / 2.0) / radius
        return conformal**4 * identity

    domain = ChartDomain.box([-outer] * 3, [outer] * 3).with_exclusions(
        Exclusion(f"r <= {inner:g}", lambda p: float(np.linalg.norm(p)) <= inner),
        Exclusion(f"r >= {outer:g}", lambda p: float(np.linalg.norm(p)) >= outer),
    )
    metric = MetricField(3, components, domain, label="schwarzschild3")
    return Space("schwarzschild3", metric, None, {"m": mass})


def harmonic_exponent(choice: str) -> Callable[[jax.Array], jax.Array]:
    """Return the harmonic function ``u`` of a conformally flat entry.

    Parameters
    ----------
    choice : str
        ``"linear"``, ``"x1x2"`` or ``"saddle"``.

    Returns
    -------
    Callable[[jax.Array], jax.Array]
        Map from the coordinate jet to the jet of ``u``.
    """
    if choice == "linear":
        weights = np.asarray(LINEAR_HARMONIC)
        return lambda x: (x * weights).sum()
    if choice == "x1x2":
        return lambda x: x[0] * x[1]
    if choice == "saddle":
        return lambda x: x[0] * x[0] - x[1] * x[1]
    raise BadParams(
        f"unknown harmonic choice {choice!r}; use one of {HARMONIC_CHOICES}"
    )


def _conformal_flat3(params: Params) -> Space:
    choice = str(params.get("u", "x1x2"))
    exponent = harmonic_exponent(choice)
    identity = np.eye(3)

    def components(x: jax.Array) -> jax.Array:
        return jnp.exp(-2.0 * exponent(x)) * identity

    metric = MetricField(
        3,
        components,
        ChartDomain.box([-1.0] * 3, [1.0] * 3),
        label=f"conformal_flat3[{choice}]",
    )
    return Space("conformal_flat3", metric, None, {"u": choice})


def _hyperbolic3_poisson(params: Params) -> Space:
    from rhlab.services.odelab import ProfileField, poisson_profile

    r_min = _positive(params, "r_min", 0.3)
    r_max = _param(params, "r_max", 2.5)
    if not r_max > r_min:
        raise BadParams("hyperbolic3_poisson needs r_max > r_min")
    margin = get_settings().exclusion_margin
    profile = poisson_profile(r_max + 0.1)
    field = ProfileField(profile)

    def components(x: jax.Array) -> jax.Array:
        radius = x[0]
        s_r = jnp.sinh(radius)
        s_theta = jnp.sin(x[1])
        weight = jnp.exp(-2.0 * field.value(radius))
        radial = s_r * s_r
        return diagonal([weight, weight * radial, weight * radial * s_theta * s_theta])

    metric = MetricField(
        dim=3,
        components=components,
        domain=ChartDomain.box(
            [r_min, margin, 0.0], [r_max, math.pi - margin, TWO_PI]
        ),
        periodic_axes=(False, False, True),
        label="hyperbolic3_poisson",
    )
    return Space(
        "hyperbolic3_poisson",
        metric,
        None,
        {"r_min": r_min, "r_max": r_max, "profile": profile, "field": field},
    )


def _factor_params(params: Params, side: str) -> dict[str, Any]:
    nested = dict(params.get(f"{side}_params", {}) or {})
    prefix = f"{side}."
    for key, value in params.items():
        if key.startswith(prefix):
            nested[key[len(prefix) :]] = value
    return nested


def product_space(left: Space, right: Space) -> Space:
    """Return the Riemannian product of two catalog spaces.

    Parameters
    ----------
    left, right : Space
        Factors; coordinates are concatenated in this order.

    Returns
    -------
    Space
        Product with block metric and, when both factors carry one, the
        block complex structure.
    """
    split = left.dim
    dim = left.dim + right.dim
    left_components = left.metric.components
    right_components = right.metric.components

    def components(x: jax.Array) -> jax.Array:
        return block_diagonal(
            [left_components(x[0:split]), right_components(x[split:dim])]
        )

    structure = None
    if left.complex_structure is not None and right.complex_structure is not None:
        left_j, right_j = left.complex_structure, right.complex_structure

        def structure(point: np.ndarray) -> np.ndarray:
            block = np.zeros((dim, dim))
            block[:split, :split] = left_j(point[:split])
            block[split:, split:] = right_j(point[split:])
            return block

    name = f"{left.name}x{right.name}"
    metric = MetricField(
        dim=dim,
        components=components,
        domain=left.metric.domain.product(right.metric.domain),
        periodic_axes=left.metric.periodic_axes + right.metric.periodic_axes,
        label=name,
    )
    return Space(
        name="product",
        metric=metric,
        complex_structure=structure,
        params={"left": left.name, "right": right.name},
        factors=(left, right),
    )


def _product(params: Params) -> Space:
    try:
        left_name = str(params["left"])
        right_name = str(params["right"])
    except KeyError as exc:
        raise BadParams(f"product needs parameter {exc.args[0]!r}") from exc
    left = make_space(left_name, _factor_params(params, "left"))
    right = make_space(right_name, _factor_params(params, "right"))
    return product_space(left, right)


SPACES: dict[str, SpaceBuilder] = {
    "euclidean": _euclidean,
    "sphere2": _sphere2,
    "sphere3": _sphere3,
    "hyperbolic2_halfplane": _hyperbolic2_halfplane,
    "hyperbolic2_warped": _hyperbolic2_warped,
    "cylinder": _cylinder,
    "flat_torus": _flat_torus,
    "product": _product,
    "schwarzschild3": _schwarzschild3,
    "conformal_flat3": _conformal_flat3,
    "hyperbolic3_poisson": _hyperbolic3_poisson,
}


SPACE_KEYS: dict[str, frozenset[str]] = {
    "euclidean": frozenset({"n", "lower", "upper"}),
    "sphere2": frozenset({"radius"}),
    "sphere3": frozenset({"radius"}),
    "hyperbolic2_halfplane": frozenset({"y_min", "y_max"}),
    "hyperbolic2_warped": frozenset({"half_width"}),
    "cylinder": frozenset({"half_length"}),
    "flat_torus": frozenset({"n"}),
    "product": frozenset({"left", "right", "left_params", "right_params"}),
    "schwarzschild3": frozenset({"m"}),
    "conformal_flat3": frozenset({"u"}),
    "hyperbolic3_poisson": frozenset({"r_min", "r_max"}),
}
# dotted keys forwarded to a nested builder
NESTED_PREFIXES: dict[str, tuple[str, ...]] = {
    "product": ("left.", "right."),
    "extend": ("solution.",),
}


def _check_keys(kind: str, name: str, params: Params, allowed: frozenset[str]) -> None:
    prefixes = NESTED_PREFIXES.get(name, ())
    unknown = sorted(
        str(key)
        for key in params
        if key not in allowed and not str(key).startswith(prefixes)
    )
    if unknown:
        raise BadParams(
            f"unknown {kind} parameter(s) {unknown} for {name!r}; "
            f"expected {sorted(allowed)}"
        )


def make_space(name: str, params: Params | None = None) -> Space:
    """Build a named model space.

    Parameters
    ----------
    name : str
        Space name, see :data:`SPACES`.
    params : Mapping[str, Any] | None, default=None
        Space parameters such as ``n`` or ``m``.

    Returns
    -------
    Space
        Metric, chart domain and optional complex structure.

    Raises
    ------
    UnknownEntry
        If the name is not a catalog space.
    BadParams
        If a parameter is invalid or unknown.
    """
    builder = SPACES.get(name)
    if builder is None:
        raise UnknownEntry(f"unknown space {name!r}")
    values = dict(params or {})
    _check_keys("space", name, values, SPACE_KEYS[name])
    return builder(values)


def _require_space(space: Space, solution: str, *names: str) -> None:
    if space.name not in names:
        raise IncompatiblePair(f"solution {solution!r} does not live on {space.name!r}")


def _affine(space: Space, params: Params) -> ScalarField:
    _require_space(space, "affine", "euclidean", "cylinder", "flat_torus")
    raw = params.get("a", [1.0] * space.dim)
    coefficients = np.asarray(raw, dtype=np.float64).reshape(-1)
    if coefficients.size != space.dim:
        raise BadParams(
            f"affine needs {space.dim} coefficients, got {coefficients.size}"
        )
    periodic = np.asarray(space.metric.periodic_axes)
    if np.any(coefficients[periodic] != 0.0):
        raise IncompatiblePair("affine functions must be constant along periodic axes")
    offset = _param(params, "c", 0.0)
    return ScalarField(lambda x: (x * coefficients).sum() + offset, "affine")


def _linear_form(space: Space, params: Params) -> ScalarField:
    _require_space(space, "linear_form", "sphere2")
    a = _param(params, "a", 0.0)
    b = _param(params, "b", 0.0)
    c = _param(params, "c", 1.0)

    def evaluate(x: jax.Array) -> jax.Array:
        s_theta = jnp.sin(x[0])
        return (
            a * s_theta * jnp.cos(x[1])
            + b * s_theta * jnp.sin(x[1])
            + c * jnp.cos(x[0])
        )

    return ScalarField(evaluate, "linear_form")


def _z_power(space: Space, params: Params) -> ScalarField:
    _require_space(space, "z_power", "sphere2")
    exponent = _param(params, "p", 2.0)
    return ScalarField(lambda x: _power(jnp.cos(x[0]), exponent), f"z^{exponent:g}")


def _hyperspherical_height(space: Space, params: Params) -> ScalarField:
    _require_space(space, "hyperspherical_height", "sphere3")
    return ScalarField(lambda x: jnp.cos(x[0]), "cos(chi)")


def _tashiro(kind: str) -> SolutionBuilder:
    def build(space: Space, params: Params) -> ScalarField:
        _require_space(
            space, f"tashiro_{kind}", "hyperbolic2_halfplane", "hyperbolic2_warped"
        )
        scale = _param(params, "scale", 1.0)
        if space.name == "hyperbolic2_halfplane":
            formulas = {
                "cosh": lambda x: (x[0] * x[0] + x[1] * x[1] + 1.0) / (2.0 * x[1]),
                "sinh": lambda x: x[0] / x[1],
                "exp": lambda x: 1.0 / x[1],
            }
        else:
            formulas = {
                "cosh": lambda x: 0.5 * jnp.exp(x[0]) * (x[1] * x[1] + 1.0)
                + 0.5 * jnp.exp(-1.0 * x[0]),
                "sinh": lambda x: x[1] * jnp.exp(x[0]),
                "exp": lambda x: jnp.exp(x[0]),
            }
        formula = formulas[kind]
        return ScalarField(lambda x: scale * formula(x), f"tashiro_{kind}")

    return build


def _static_potential(space: Space, params: Params) -> ScalarField:
    _require_space(space, "static_potential", "schwarzschild3")
    half_mass = float(space.params["m"]) / 2.0

    def evaluate(x: jax.Array) -> jax.Array:
        ratio = half_mass / jnp.sqrt((x * x).sum())
        return (1.0 - ratio) / (1.0 + ratio)

    return ScalarField(evaluate, "static_potential")


def _conformal_exp(space: Space, params: Params) -> ScalarField:
    _require_space(space, "conformal_exp", "conformal_flat3")
    exponent = harmonic_exponent(str(space.params["u"]))
    return ScalarField(lambda x: jnp.exp(-1.0 * exponent(x)), "exp(-u)")


def _poisson_exp(space: Space, params: Params) -> ScalarField:
    _require_space(space, "poisson_exp", "hyperbolic3_poisson")
    field = space.params["field"]
    return ScalarField(lambda x: jnp.exp(-1.0 * field.value(x[0])), "exp(-u)")


def _coordinate_power(space: Space, params: Params) -> ScalarField:
    axis = _param(params, "i", 0, int)
    if not 0 <= axis < space.dim:
        raise BadParams(f"coordinate index {axis} outside 0..{space.dim - 1}")
    exponent = _param(params, "p", 2.0)
    offset = _param(params, "c0", 0.0)
    scale = _param(params, "scale", 1.0)
    return ScalarField(
        lambda x: offset + scale * _power(x[axis], exponent),
        f"{offset:g}+x{axis}^{exponent:g}",
    )


def _constant(space: Space, params: Params) -> ScalarField:
    value = _param(params, "c", 1.0)
    return ScalarField(lambda x: value, f"{value:g}")


def _closed_family(space: Space, params: Params) -> ScalarField:
    from rhlab.services.odelab import closed_family_jet

    axis = _param(params, "axis", 0, int)
    kind = str(params.get("kind", "b1"))
    amplitude = _param(params, "A", 1.0)
    phase = _param(params, "phi", 0.0)
    mu1 = _param(params, "mu1", 0.0)
    closed_family_jet(kind, amplitude, phase, mu1, 0.0)
    return ScalarField(
        lambda x: closed_family_jet(kind, amplitude, phase, mu1, x[axis]),
        f"{kind}(t)",
    )


def extension_factor(space: Space, params: Params) -> tuple[str, ScalarField]:
    """Return the side (``left`` or ``right``) and the factor solution of ``extend``.

    Raises
    ------
    IncompatiblePair
        If the space is not a product.
    BadParams
        If the side or the inner solution is missing or invalid.
    """
    if not space.factors:
        raise IncompatiblePair("extend needs a product space")
    side = str(params.get("factor", "right"))
    if side not in ("left", "right"):
        raise BadParams(f"factor must be 'left' or 'right', got {side!r}")
    left, right = space.factors
    inner_name = str(params.get("solution", ""))
    if not inner_name:
        raise BadParams("extend needs parameter 'solution'")
    factor = left if side == "left" else right
    return side, make_solution(inner_name, _factor_params(params, "solution"), factor)


def _extend(space: Space, params: Params) -> ScalarField:
    side, inner = extension_factor(space, params)
    left, right = space.factors
    factor = left if side == "left" else right
    start = 0 if side == "left" else left.dim
    stop = start + factor.dim
    inner_eval = inner.eval
    return ScalarField(lambda x: inner_eval(x[start:stop]), f"ext({inner.label})")


SOLUTIONS: dict[str, SolutionBuilder] = {
    "affine": _affine,
    "linear_form": _linear_form,
    "z_power": _z_power,
    "hyperspherical_height": _hyperspherical_height,
    "tashiro_cosh": _tashiro("cosh"),
    "tashiro_sinh": _tashiro("sinh"),
    "tashiro_exp": _tashiro("exp"),
    "static_potential": _static_potential,
    "conformal_exp": _conformal_exp,
    "poisson_exp": _poisson_exp,
    "coordinate_power": _coordinate_power,
    "constant": _constant,
    "closed_family": _closed_family,
    "extend": _extend,
}


SOLUTION_KEYS: dict[str, frozenset[str]] = {
    "affine": frozenset({"a", "c"}),
    "linear_form": frozenset({"a", "b", "c"}),
    "z_power": frozenset({"p"}),
    "hyperspherical_height": frozenset(),
    "tashiro_cosh": frozenset({"scale"}),
    "tashiro_sinh": frozenset({"scale"}),
    "tashiro_exp": frozenset({"scale"}),
    "static_potential": frozenset(),
    "conformal_exp": frozenset(),
    "poisson_exp": frozenset(),
    "coordinate_power": frozenset({"i", "p", "c0", "scale"}),
    "constant": frozenset({"c"}),
    "closed_family": frozenset({"axis", "kind", "A", "phi", "mu1"}),
    "extend": frozenset({"factor", "solution", "solution_params"}),
}


def make_solution(name: str, params: Params | None, space: Space) -> ScalarField:
    """Build a named function on a catalog space.

    Parameters
    ----------
    name : str
        Solution name, see :data:`SOLUTIONS`.
    params : Mapping[str, Any] | None
        Solution parameters.
    space : Space
        Space the function lives on.

    Returns
    -------
    ScalarField
        The function.

    Raises
    ------
    UnknownEntry
        If the name is not a catalog solution.
    IncompatiblePair
        If the solution does not live on the space.
    BadParams
        If a parameter is invalid or unknown.
    """
    builder = SOLUTIONS.get(name)
    if builder is None:
        raise UnknownEntry(f"unknown solution {name!r}")
    values = dict(params or {})
    _check_keys("solution", name, values, SOLUTION_KEYS[name])
    return builder(space, values)


@dataclass(frozen=True, slots=True)
class CatalogEntry:
    """Named (space, function) pair with documented verdicts.

    Attributes
    ----------
    name : str
        Entry name used in scenario files.
    space : str
        Space name.
    solution : str
        Solution name.
    space_params : dict[str, Any]
        Space parameters.
    solution_params : dict[str, Any]
        Solution parameters.
    tags : tuple[str, ...]
        Filter tags such as ``"constant-S"`` or ``"kahler"``.
    expected : dict[str, str]
        Check name to ``"pass"`` or ``"fail"``.
    provenance : str
        Where the example comes from.
    """

    name: str
    space: str
    solution: str
    space_params: dict[str, Any] = field(default_factory=dict)
    solution_params: dict[str, Any] = field(default_factory=dict)
    tags: tuple[str, ...] = ()
    expected: dict[str, str] = field(default_factory=dict)
    provenance: str = ""

    def build_space(self) -> Space:
        """Return the entry's space."""
        return make_space(self.space, self.space_params)

    def build(self) -> RHInstance:
        """Return the entry as a verifier instance."""
        space = self.build_space()
        f = make_solution(self.solution, self.solution_params, space)
        return RHInstance(
            metric=space.metric,
            f=f,
            complex_structure=space.complex_structure,
            label=self.name,
        )

    def metadata(self) -> dict[str, Any]:
        """Return a JSON-friendly description."""
        return {
            "name": self.name,
            "space": self.space,
            "space_params": dict(self.space_params),
            "solution": self.solution,
            "solution_params": dict(self.solution_params),
            "tags": list(self.tags),
            "expected": dict(self.expected),
            "provenance": self.provenance,
        }


_SOLVES = {"rh_residual": "pass", "mu": "pass", "identity_suite": "pass"}
_FAILS = {"rh_residual": "fail"}
_TORUS = {"left": "sphere2", "right": "flat_torus", "right.n": 2}

ENTRIES: tuple[CatalogEntry, ...] = (
    CatalogEntry(
        "euclidean2_affine",
        "euclidean",
        "affine",
        {"n": 2},
        {"a": [1.0, -2.0], "c": 0.5},
        ("flat", "constant-S"),
        {
            **_SOLVES,
            "curvature_invariants": "pass",
            "level_set": "pass",
            "zero_set": "pass",
        },
        "affine functions on flat space",
    ),
    CatalogEntry(
        "euclidean4_affine",
        "euclidean",
        "affine",
        {"n": 4},
        {"a": [1.0, 0.5, -1.0, 2.0], "c": 0.25},
        ("flat", "constant-S", "kahler"),
        {**_SOLVES, "kahler": "pass"},
        "affine functions on flat C^2",
    ),
    CatalogEntry(
        "euclidean4_square",
        "euclidean",
        "coordinate_power",
        {"n": 4},
        {"i": 0, "p": 2},
        ("flat", "kahler", "negative"),
        {**_FAILS, "kahler": "fail"},
        "rank-one Hessian, not J-invariant",
    ),
    CatalogEntry(
        "euclidean3_bump",
        "euclidean",
        "coordinate_power",
        {"n": 3},
        {"i": 0, "p": 2, "c0": 1.0},
        ("flat", "conformal", "negative"),
        {**_FAILS, "conformal": "fail"},
        "positive non-solution for the conformal reformulation",
    ),
    CatalogEntry(
        "sphere2_linear_form",
        "sphere2",
        "linear_form",
        {},
        {"a": 0.0, "b": 0.0, "c": 1.0},
        ("constant-S", "obata"),
        {
            **_SOLVES,
            "level_set": "pass",
            "zero_set": "pass",
            "ricci_spectrum": "pass",
            "curvature_invariants": "pass",
        },
        "first eigenfunctions of the round sphere",
    ),
    CatalogEntry(
        "sphere2_z_squared",
        "sphere2",
        "z_power",
        {},
        {"p": 2},
        ("constant-S", "negative"),
        dict(_FAILS),
        "closed-form Hessian of z^2 on the sphere",
    ),
    CatalogEntry(
        "hyperbolic2_halfplane_cosh",
        "hyperbolic2_halfplane",
        "tashiro_cosh",
        {},
        {},
        ("constant-S", "tashiro"),
        dict(_SOLVES),
        "cosh of the distance to a point, nonempty critical set",
    ),
    CatalogEntry(
        "hyperbolic2_halfplane_sinh",
        "hyperbolic2_halfplane",
        "tashiro_sinh",
        {},
        {},
        ("constant-S", "tashiro"),
        {**_SOLVES, "zero_set": "pass"},
        "sinh of the signed distance to a geodesic",
    ),
    CatalogEntry(
        "hyperbolic2_halfplane_exp",
        "hyperbolic2_halfplane",
        "tashiro_exp",
        {},
        {},
        ("constant-S", "tashiro"),
        dict(_SOLVES),
        "exponential of the Busemann function, empty zero set",
    ),
    CatalogEntry(
        "hyperbolic2_warped_exp",
        "hyperbolic2_warped",
        "tashiro_exp",
        {},
        {},
        ("constant-S", "tashiro", "warped-chart"),
        dict(_SOLVES),
        "horocyclic chart of the hyperbolic plane",
    ),
    CatalogEntry(
        "cylinder_affine",
        "cylinder",
        "affine",
        {},
        {"a": [1.0, 0.0], "c": 2.0},
        ("flat", "constant-S"),
        dict(_SOLVES),
        "affine function along the axis of a flat cylinder",
    ),
    CatalogEntry(
        "sphere2_x_torus2_z",
        "product",
        "extend",
        _TORUS,
        {"factor": "left", "solution": "linear_form"},
        ("constant-S", "kahler", "product"),
        {
            **_SOLVES,
            "level_set": "pass",
            "zero_set": "pass",
            "ricci_spectrum": "pass",
            "codazzi": "pass",
            "ricci_traces": "pass",
            "kahler": "pass",
        },
        "trivial extension of the height function to S^2 x T^2",
    ),
    CatalogEntry(
        "hyperbolic2_x_torus2_cosh",
        "product",
        "extend",
        {"left": "hyperbolic2_halfplane", "right": "flat_torus", "right.n": 2},
        {"factor": "left", "solution": "tashiro_cosh"},
        ("constant-S", "kahler", "product"),
        {
            **_SOLVES,
            "ricci_spectrum": "pass",
            "codazzi": "pass",
            "ricci_traces": "pass",
            "kahler": "pass",
        },
        "trivial extension of a Tashiro solution to H^2 x T^2",
    ),
    CatalogEntry(
        "line_x_hyperbolic2_cosh",
        "product",
        "extend",
        {"left": "euclidean", "left.n": 1, "right": "hyperbolic2_halfplane"},
        {"factor": "right", "solution": "tashiro_cosh"},
        ("constant-S", "product"),
        dict(_SOLVES),
        "trivial extension across a flat line factor",
    ),
    CatalogEntry(
        "sphere2_x_sphere2_z",
        "product",
        "extend",
        {"left": "sphere2", "right": "sphere2"},
        {"factor": "right", "solution": "linear_form"},
        ("constant-S", "product", "negative"),
        dict(_FAILS),
        "extension across a factor that is not Ricci-flat",
    ),
    CatalogEntry(
        "schwarzschild3_static",
        "schwarzschild3",
        "static_potential",
        {"m": 1.0},
        {},
        ("static", "scalar-flat"),
        {
            "static_equation": "pass",
            "scalar_flat": "pass",
            "codazzi": "pass",
            "curvature_invariants": "pass",
            "rh_residual": "fail",
            "ricci_traces": "fail",
        },
        "static potential of the spatial Schwarzschild metric",
    ),
    CatalogEntry(
        "conformal_flat3_linear",
        "conformal_flat3",
        "conformal_exp",
        {"u": "linear"},
        {},
        ("conformal", "nonconstant-S"),
        {**_SOLVES, "conformal": "pass"},
        "e^{-2u} times the flat metric with u linear",
    ),
    CatalogEntry(
        "conformal_flat3_x1x2",
        "conformal_flat3",
        "conformal_exp",
        {"u": "x1x2"},
        {},
        ("conformal", "nonconstant-S"),
        {**_SOLVES, "conformal": "pass"},
        "e^{-2u} times the flat metric with u = x1 x2",
    ),
    CatalogEntry(
        "conformal_flat3_saddle",
        "conformal_flat3",
        "conformal_exp",
        {"u": "saddle"},
        {},
        ("conformal", "nonconstant-S"),
        {**_SOLVES, "conformal": "pass"},
        "e^{-2u} times the flat metric with u = x1^2 - x2^2",
    ),
    CatalogEntry(
        "hyperbolic3_poisson",
        "hyperbolic3_poisson",
        "poisson_exp",
        {},
        {},
        ("conformal", "nonconstant-S"),
        {**_SOLVES, "conformal": "pass"},
        "conformal change of H^3 by a radial solution of the Poisson equation",
    ),
)


def list_catalog(tag: str | None = None) -> list[CatalogEntry]:
    """Return catalog entries in stable order.

    Parameters
    ----------
    tag : str | None, default=None
        Keep only entries carrying this tag.

    Returns
    -------
    list[CatalogEntry]
        Matching entries.
    """
    if tag is None:
        return list(ENTRIES)
    return [entry for entry in ENTRIES if tag in entry.tags]


def get_entry(name: str) -> CatalogEntry:
    """Return a catalog entry by name.

    Raises
    ------
    UnknownEntry
        If no entry has this name.
    """
    for entry in ENTRIES:
        if entry.name == name:
            return entry
    raise UnknownEntry(f"unknown catalog entry {name!r}")
