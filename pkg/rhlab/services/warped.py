"""Warped products ``B x_phi F`` and the two reduction cases."""

from __future__ import annotations

import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from enum import StrEnum
from functools import lru_cache
from typing import Any

import jax
import jax.numpy as jnp
import numpy as np
from numpy.typing import ArrayLike, NDArray

from rhlab.exceptions import (
    BadParams,
    CaseMismatch,
    NonPositiveWarp,
    UnknownEntry,
    ZeroDivisionSample,
)
from rhlab.geometry.curvature import curvature_pack, operator_norm, scalar_derivatives
from rhlab.geometry.fields import (
    ChartDomain,
    Exclusion,
    MetricField,
    RHInstance,
    ScalarField,
    Space,
)
from rhlab.geometry.jet import block_diagonal
from rhlab.services import catalog
from rhlab.services import verifier
from rhlab.types import MuStats

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]

WARP_FLOOR = 1e-8
BASE_ZERO_BAND = 1e-4
_IDENTITY_MATCH = 1e-12
_FLAT_FIBER = 1e-12


class CaseTag(StrEnum):
    """Which reduction a warped instance is checked against."""

    A = "a"
    B = "b"
    PRODUCT = "product"


@dataclass(frozen=True, slots=True)
class WarpedSpec:
    """Warped product data with a product candidate ``f = f1 * f2``.

    Attributes
    ----------
    base, fiber : MetricField
        Base metric ``g1`` and fiber metric ``g2``.
    warp : ScalarField
        Positive warping function ``phi`` on the base.
    f1 : ScalarField
        Base factor of the candidate.
    f2 : ScalarField
        Fiber factor of the candidate.
    case_tag : CaseTag
        Reduction to check.
    label : str
        Display label.
    fiber_space : Space | None
        Catalog space of the fiber, kept for product splitting.
    """

    base: MetricField
    fiber: MetricField
    warp: ScalarField
    f1: ScalarField
    f2: ScalarField
    case_tag: CaseTag
    label: str = "warped"
    fiber_space: Space | None = field(default=None, compare=False)

    @property
    def n1(self) -> int:
        """Return the base dimension."""
        return self.base.dim

    @property
    def n2(self) -> int:
        """Return the fiber dimension."""
        return self.fiber.dim

    @property
    def dim(self) -> int:
        """Return the total dimension."""
        return self.n1 + self.n2

    def split(self, point: ArrayLike) -> tuple[FloatArray, FloatArray]:
        """Split a product chart point into base and fiber points."""
        values = np.asarray(point, dtype=np.float64).reshape(-1)
        return values[: self.n1], values[self.n1 :]


@lru_cache(maxsize=64)
def assemble(spec: WarpedSpec) -> tuple[MetricField, ScalarField]:
    """Build ``g = g1 + phi^2 g2`` and ``f = f1 * f2``.

    Parameters
    ----------
    spec : WarpedSpec
        Warped data.

    Returns
    -------
    tuple[MetricField, ScalarField]
        Assembled metric and candidate.

    Raises
    ------
    NonPositiveWarp
        When evaluated at a point where ``phi <= 1e-8``.
    """
    n1, dim = spec.n1, spec.dim
    base_components = spec.base.components
    fiber_components = spec.fiber.components
    warp = spec.warp
    warp_eval = warp.eval
    f1_eval, f2_eval = spec.f1.eval, spec.f2.eval

    def components(x: jax.Array) -> jax.Array:
        base_x, fiber_x = x[0:n1], x[n1:dim]
        phi = warp_eval(base_x)
        fiber_block = jnp.asarray(fiber_components(fiber_x), dtype=jnp.float64)
        return block_diagonal([base_components(base_x), phi * phi * fiber_block])

    def guard(point: FloatArray) -> None:
        phi = warp(point[0:n1])
        if phi <= WARP_FLOOR:
            raise NonPositiveWarp(
                f"warp {phi:.3g} at base point {point[0:n1].tolist()}"
            )

    metric = MetricField(
        dim=dim,
        components=components,
        domain=spec.base.domain.product(spec.fiber.domain),
        periodic_axes=spec.base.periodic_axes + spec.fiber.periodic_axes,
        label=spec.label,
        guard=guard,
    )
    f = ScalarField(
        lambda x: f1_eval(x[0:n1]) * f2_eval(x[n1:dim]),
        f"{spec.f1.label}*{spec.f2.label}",
    )
    return metric, f


def instance(spec: WarpedSpec) -> RHInstance:
    """Return the assembled metric and candidate as an instance."""
    metric, f = assemble(spec)
    return RHInstance(metric, f, label=spec.label)


def sampling_exclusions(spec: WarpedSpec) -> tuple[Exclusion, ...]:
    """Return extra exclusions used when sampling the assembled chart."""
    n1 = spec.n1
    warp = spec.warp
    rules = [
        Exclusion(f"phi <= {WARP_FLOOR:g}", lambda p: warp(p[:n1]) <= WARP_FLOOR)
    ]
    if spec.case_tag is CaseTag.B:
        f1 = spec.f1
        rules.append(
            Exclusion(
                f"|f1| < {BASE_ZERO_BAND:g}",
                lambda p: abs(f1(p[:n1])) < BASE_ZERO_BAND,
            )
        )
    return tuple(rules)


def validate(spec: WarpedSpec, points: Sequence[ArrayLike]) -> None:
    """Check that the functions match the declared case.

    Case ``a`` needs ``f1 == phi``; case ``b`` needs ``f2`` constant.

    Raises
    ------
    CaseMismatch
        If the functions do not fit the tag at some point.
    """
    for point in points:
        base_pt, fiber_pt = spec.split(point)
        if spec.case_tag is CaseTag.A:
            phi, f1 = spec.warp(base_pt), spec.f1(base_pt)
            if abs(f1 - phi) > _IDENTITY_MATCH * (1.0 + abs(phi)):
                raise CaseMismatch(f"case a needs f1 == phi, got {f1!r} != {phi!r}")
        elif spec.case_tag is CaseTag.B:
            df2 = spec.f2.jet(fiber_pt, 1).d1
            if np.max(np.abs(df2), initial=0.0) > _FLAT_FIBER:
                raise CaseMismatch("case b needs a constant fiber factor")


def besse_ricci(spec: WarpedSpec, point: ArrayLike) -> FloatArray:
    """Return the Ricci endomorphism of the warped product from its factors.

    Uses the block formulas ``Ric1 - (n2/phi) nabla^2 phi`` on the base and
    ``Ric2/phi^2 + (Delta phi/phi - (n2-1)|grad phi|^2/phi^2) Id`` on the fiber.

    Parameters
    ----------
    spec : WarpedSpec
        Warped data.
    point : ArrayLike
        Product chart point.

    Returns
    -------
    numpy.ndarray
        Block endomorphism of size ``n1 + n2``.
    """
    base_pt, fiber_pt = spec.split(point)
    base_pack = curvature_pack(spec.base, base_pt, order=2)
    fiber_pack = curvature_pack(spec.fiber, fiber_pt, order=2)
    phi = scalar_derivatives(spec.base, spec.warp, base_pt, base_pack)
    if phi.value <= WARP_FLOOR:
        raise NonPositiveWarp(f"warp {phi.value:.3g} at {base_pt.tolist()}")
    upper = base_pack.ric - (spec.n2 / phi.value) * phi.hessian
    shift = phi.laplacian / phi.value - (spec.n2 - 1) * phi.gradient_norm**2 / (
        phi.value**2
    )
    lower = fiber_pack.ric / phi.value**2 + shift * np.eye(spec.n2)
    block = np.zeros((spec.dim, spec.dim))
    block[: spec.n1, : spec.n1] = upper
    block[spec.n1 :, spec.n1 :] = lower
    return block


def besse_residual(spec: WarpedSpec, point: ArrayLike) -> float:
    """Return the gap between the block formulas and direct curvature."""
    metric, _ = assemble(spec)
    values = metric.domain.require(point)
    pack = curvature_pack(metric, values, order=2)
    return operator_norm(besse_ricci(spec, values) - pack.ric, pack.metric)


def mu1_value(spec: WarpedSpec, base_point: ArrayLike) -> float:
    """Return ``(n2 - 2)|grad f1|^2 - f1 Delta f1`` on the base."""
    d = scalar_derivatives(spec.base, spec.f1, base_point)
    return (spec.n2 - 2) * d.gradient_norm**2 - d.value * d.laplacian


def mu1_prime_value(spec: WarpedSpec, base_point: ArrayLike) -> float:
    """Return the fiber Einstein constant forced in case ``b``.

    Raises
    ------
    ZeroDivisionSample
        If ``|f1| < 1e-4`` at the point.
    """
    f1 = scalar_derivatives(spec.base, spec.f1, base_point)
    if abs(f1.value) < BASE_ZERO_BAND:
        raise ZeroDivisionSample(f"f1 = {f1.value:.3g} at {list(base_point)}")
    phi = scalar_derivatives(spec.base, spec.warp, base_point)
    mixed = float(f1.differential @ phi.gradient)
    return (
        -(phi.value / f1.value) * mixed
        + (spec.n2 - 1) * phi.gradient_norm**2
        - phi.value * phi.laplacian
    )


def mu2_value(spec: WarpedSpec, fiber_point: ArrayLike, mu1: float) -> float:
    """Return ``2|grad f2|^2 + f2 Delta f2 - mu1 f2^2`` on the fiber."""
    d = scalar_derivatives(spec.fiber, spec.f2, fiber_point)
    return 2.0 * d.gradient_norm**2 + d.value * d.laplacian - mu1 * d.value**2


@dataclass(frozen=True, slots=True)
class CaseResiduals:
    """Per-point residuals of a reduction case.

    Attributes
    ----------
    records : list[dict[str, float]]
        Residuals in point order.
    constant : MuStats
        Samples of ``mu1`` (case ``a``) or ``mu1'`` (case ``b``).
    """

    records: list[dict[str, float]]
    constant: MuStats

    def worst(self) -> dict[str, float]:
        """Return the largest value of every residual plus the constant spread."""
        keys = self.records[0].keys() if self.records else ()
        summary = {key: max(record[key] for record in self.records) for key in keys}
        summary["constant_spread"] = self.constant.spread
        return summary


def case_a_residuals(spec: WarpedSpec, points: Sequence[ArrayLike]) -> CaseResiduals:
    """Return the case ``a`` residuals, ``phi = f1``.

    The base equation is ``(n2 - 1) nabla^2 f1 = f1 Ric1`` and the fiber
    equation ``nabla^2 f2 = f2 (mu1 Id - Ric2)`` with ``mu1`` the sample mean.

    Raises
    ------
    CaseMismatch
        If the spec is not tagged ``a`` or ``f1 != phi``.
    """
    if spec.case_tag is not CaseTag.A:
        raise CaseMismatch(f"spec {spec.label} is tagged {spec.case_tag}")
    validate(spec, points)
    splits = [spec.split(point) for point in points]
    constant = MuStats.from_samples([mu1_value(spec, base) for base, _ in splits])
    records = []
    for base_pt, fiber_pt in splits:
        base_pack = curvature_pack(spec.base, base_pt, order=2)
        f1 = scalar_derivatives(spec.base, spec.f1, base_pt, base_pack)
        base_res = (spec.n2 - 1) * f1.hessian - f1.value * base_pack.ric
        fiber_pack = curvature_pack(spec.fiber, fiber_pt, order=2)
        f2 = scalar_derivatives(spec.fiber, spec.f2, fiber_pt, fiber_pack)
        fiber_res = f2.hessian - f2.value * (
            constant.mean * np.eye(spec.n2) - fiber_pack.ric
        )
        records.append(
            {
                "base": operator_norm(base_res, base_pack.metric),
                "fiber": operator_norm(fiber_res, fiber_pack.metric),
            }
        )
    return CaseResiduals(records, constant)


def case_b_residuals(spec: WarpedSpec, points: Sequence[ArrayLike]) -> CaseResiduals:
    """Return the case ``b`` residuals, ``f2`` constant.

    The base equation is ``nabla^2 f1 + f1 (Ric1 - (n2/phi) nabla^2 phi) = 0``
    and the fiber must be Einstein with constant ``mu1'``.

    Raises
    ------
    CaseMismatch
        If the spec is not tagged ``b`` or ``f2`` is not constant.
    ZeroDivisionSample
        If a point has ``|f1| < 1e-4``.
    """
    if spec.case_tag is not CaseTag.B:
        raise CaseMismatch(f"spec {spec.label} is tagged {spec.case_tag}")
    validate(spec, points)
    splits = [spec.split(point) for point in points]
    constant = MuStats.from_samples([mu1_prime_value(spec, base) for base, _ in splits])
    records = []
    for base_pt, fiber_pt in splits:
        base_pack = curvature_pack(spec.base, base_pt, order=2)
        f1 = scalar_derivatives(spec.base, spec.f1, base_pt, base_pack)
        phi = scalar_derivatives(spec.base, spec.warp, base_pt, base_pack)
        base_res = f1.hessian + f1.value * (
            base_pack.ric - (spec.n2 / phi.value) * phi.hessian
        )
        fiber_pack = curvature_pack(spec.fiber, fiber_pt, order=2)
        einstein = fiber_pack.ric - constant.mean * np.eye(spec.n2)
        records.append(
            {
                "base": operator_norm(base_res, base_pack.metric),
                "einstein_fiber": operator_norm(einstein, fiber_pack.metric),
            }
        )
    return CaseResiduals(records, constant)


def case_residuals(spec: WarpedSpec, points: Sequence[ArrayLike]) -> CaseResiduals:
    """Dispatch to the residuals of the tagged case."""
    if spec.case_tag is CaseTag.A:
        return case_a_residuals(spec, points)
    if spec.case_tag is CaseTag.B:
        return case_b_residuals(spec, points)
    raise CaseMismatch(f"spec {spec.label} has no reduction case")


def equivalence_records(
    spec: WarpedSpec, points: Sequence[ArrayLike], tol: float
) -> list[dict[str, float]]:
    """Compare the case conditions with the assembled equation at each point.

    Returns
    -------
    list[dict[str, float]]
        Per point: case residuals, the spread of the case constant,
        ``rh_residual`` of the assembled instance and ``mismatch`` (1.0 when
        exactly one side is below ``tol``).
    """
    assembled = instance(spec)
    result = case_residuals(spec, points)
    spread_ok = result.constant.spread < tol
    records = []
    for point, record in zip(points, result.records):
        rh = verifier.rh_residual(assembled, point)
        case_ok = spread_ok and all(value < tol for value in record.values())
        records.append(
            {
                **record,
                "constant_spread": result.constant.spread,
                "rh_residual": rh,
                "mismatch": float(case_ok != (rh < tol)),
            }
        )
    return records


def mu_relation_check(
    spec: WarpedSpec, points: Sequence[ArrayLike]
) -> dict[str, Any]:
    """Compare ``mu`` of the assembled solution with the fiber invariant.

    ``stated`` is the gap in ``mu = n2 |grad f1|^2 f2^2 + mu2``, ``corrected``
    the gap in ``mu = mu2``. The two agree where ``grad f1`` or ``f2``
    vanishes.

    Returns
    -------
    dict[str, Any]
        ``records`` per point and ``summary`` with the worst gaps, the
        spread of ``|grad f1|`` and the mean and spread of ``mu1``.
    """
    if spec.case_tag is not CaseTag.A:
        raise CaseMismatch("the mu relation is stated for case a")
    assembled = instance(spec)
    splits = [spec.split(point) for point in points]
    mu1_stats = MuStats.from_samples([mu1_value(spec, base) for base, _ in splits])
    mu1 = mu1_stats.mean
    records = []
    for point, (base_pt, fiber_pt) in zip(points, splits):
        total = verifier.mu(assembled, point)
        fiber_mu = mu2_value(spec, fiber_pt, mu1)
        grad_f1 = scalar_derivatives(spec.base, spec.f1, base_pt).gradient_norm
        f2 = spec.f2(fiber_pt)
        records.append(
            {
                "mu": total,
                "mu2": fiber_mu,
                "stated": abs(total - spec.n2 * grad_f1**2 * f2**2 - fiber_mu),
                "corrected": abs(total - fiber_mu),
                "grad_f1": grad_f1,
            }
        )
    gradients = [record["grad_f1"] for record in records]
    summary = {
        "stated": max(record["stated"] for record in records),
        "corrected": max(record["corrected"] for record in records),
        "grad_f1_spread": max(gradients) - min(gradients),
        "mu1": mu1,
        "mu1_spread": mu1_stats.spread,
    }
    return {"records": records, "summary": summary}


def product_split_check(
    left: Space,
    right: Space,
    f2: ScalarField,
    points: Sequence[ArrayLike],
) -> list[dict[str, float]]:
    """Check a product solution ``f(x, y) = f2(y)`` against its splitting.

    The extension solves the equation iff ``f2`` solves on ``right`` and
    ``left`` is Ricci-flat.

    Returns
    -------
    list[dict[str, float]]
        Per point: ``rh_residual`` of the extension, ``factor`` residual of
        ``f2`` on ``right`` and ``base_ricci`` of ``left``.
    """
    product = catalog.product_space(left, right)
    split = left.dim
    inner = f2.eval
    extended = RHInstance(
        product.metric,
        ScalarField(lambda x: inner(x[split:]), f"ext({f2.label})"),
        label=f"{left.name}x{right.name}",
    )
    factor = RHInstance(right.metric, f2, label=right.name)
    records = []
    for point in points:
        values = np.asarray(point, dtype=np.float64).reshape(-1)
        left_pack = curvature_pack(left.metric, values[:split], order=2)
        rh = verifier.rh_residual(extended, values)
        factor_res = verifier.rh_residual(factor, values[split:])
        base_ricci = operator_norm(left_pack.ric, left_pack.metric)
        records.append(
            {"rh_residual": rh, "factor": factor_res, "base_ricci": base_ricci}
        )
    return records


# Presets


def _line(lower: float, upper: float) -> MetricField:
    params = {"n": 1, "lower": lower, "upper": upper}
    return catalog.make_space("euclidean", params).metric


def _on(space: Space, name: str, params: dict[str, Any] | None = None) -> ScalarField:
    return catalog.make_solution(name, params, space)


def _identity_warp(label: str = "t") -> ScalarField:
    return ScalarField(lambda x: x[0], label)


def _constant(value: float) -> ScalarField:
    return ScalarField(lambda x: value, f"{value:g}")


def _hyperbolic_line(params: dict[str, Any]) -> WarpedSpec:
    exp_t = ScalarField(lambda x: jnp.exp(x[0]), "exp(t)")
    fiber = catalog.make_space("euclidean", {"n": 1, "lower": -1.0, "upper": 1.0})
    return WarpedSpec(
        base=_line(-1.0, 1.0),
        fiber=fiber.metric,
        warp=exp_t,
        f1=exp_t,
        f2=_on(fiber, "affine", {"a": [1.0], "c": 2.0}),
        case_tag=CaseTag.A,
        label="hyperbolic_line",
        fiber_space=fiber,
    )


def _sphere_fiber(
    label: str,
    warp: ScalarField,
    solution: str,
    solution_params: dict[str, Any] | None = None,
    *,
    base: MetricField,
    fiber_name: str = "sphere2",
    fiber_params: dict[str, Any] | None = None,
) -> WarpedSpec:
    fiber = catalog.make_space(fiber_name, fiber_params)
    return WarpedSpec(
        base=base,
        fiber=fiber.metric,
        warp=warp,
        f1=warp,
        f2=_on(fiber, solution, solution_params),
        case_tag=CaseTag.A,
        label=label,
        fiber_space=fiber,
    )


def _cylinder_sphere(params: dict[str, Any]) -> WarpedSpec:
    return _sphere_fiber(
        "cylinder_sphere", _constant(1.0), "linear_form", base=_line(-1.0, 1.0)
    )


def _cylinder_sphere_square(params: dict[str, Any]) -> WarpedSpec:
    return _sphere_fiber(
        "cylinder_sphere_square",
        _constant(1.0),
        "z_power",
        {"p": 2.0},
        base=_line(-1.0, 1.0),
    )


def _polar3_linear(params: dict[str, Any]) -> WarpedSpec:
    return _sphere_fiber(
        "polar3_linear", _identity_warp(), "linear_form", base=_line(0.3, 2.0)
    )


def _polar4_height(params: dict[str, Any]) -> WarpedSpec:
    return _sphere_fiber(
        "polar4_height",
        _identity_warp(),
        "hyperspherical_height",
        base=_line(0.3, 2.0),
        fiber_name="sphere3",
    )


def _polar4_wrong_radius(params: dict[str, Any]) -> WarpedSpec:
    radius = float(params.get("radius", 2.0))
    return _sphere_fiber(
        "polar4_wrong_radius",
        _identity_warp(),
        "hyperspherical_height",
        base=_line(0.3, 2.0),
        fiber_name="sphere3",
        fiber_params={"radius": radius},
    )


def _case_b(
    label: str,
    base: MetricField,
    warp: ScalarField,
    f1: ScalarField,
    fiber: Space,
) -> WarpedSpec:
    return WarpedSpec(
        base=base,
        fiber=fiber.metric,
        warp=warp,
        f1=f1,
        f2=_constant(1.0),
        case_tag=CaseTag.B,
        label=label,
        fiber_space=fiber,
    )


def _torus() -> Space:
    return catalog.make_space("flat_torus", {"n": 2})


def _line_torus_affine(params: dict[str, Any]) -> WarpedSpec:
    line = catalog.make_space("euclidean", {"n": 1, "lower": -1.0, "upper": 1.0})
    return _case_b(
        "line_torus_affine",
        line.metric,
        _constant(1.0),
        _on(line, "affine", {"a": [1.0], "c": 2.0}),
        _torus(),
    )


def _line_torus_square(params: dict[str, Any]) -> WarpedSpec:
    line = catalog.make_space("euclidean", {"n": 1, "lower": -1.0, "upper": 1.0})
    return _case_b(
        "line_torus_square",
        line.metric,
        _constant(1.0),
        _on(line, "coordinate_power", {"i": 0, "p": 2.0, "c0": 1.0}),
        _torus(),
    )


def _hyperbolic_torus_cosh(params: dict[str, Any]) -> WarpedSpec:
    plane = catalog.make_space("hyperbolic2_halfplane")
    return _case_b(
        "hyperbolic_torus_cosh",
        plane.metric,
        _constant(1.0),
        _on(plane, "tashiro_cosh"),
        _torus(),
    )


def _polar3_radius(params: dict[str, Any]) -> WarpedSpec:
    return _case_b(
        "polar3_radius",
        _line(0.3, 2.0),
        _identity_warp(),
        _identity_warp(),
        catalog.make_space("sphere2"),
    )


def _conformal_radial(params: dict[str, Any]) -> WarpedSpec:
    a = float(params.get("a", 0.3))
    lower = float(params.get("r_min", 0.5))
    upper = float(params.get("r_max", 2.0))
    if lower <= 0.0 or upper <= lower:
        raise BadParams("conformal_radial needs 0 < r_min < r_max")
    base = MetricField(
        dim=1,
        components=lambda x: jnp.exp(2.0 * a / x[0]) * np.eye(1),
        domain=ChartDomain.box([lower], [upper]),
        label="exp(2a/r)dr^2",
    )
    return _case_b(
        "conformal_radial",
        base,
        ScalarField(lambda x: x[0] * jnp.exp(a / x[0]), "r*exp(a/r)"),
        ScalarField(lambda x: jnp.exp(a / x[0]), "exp(a/r)"),
        catalog.make_space("sphere2"),
    )


WarpedBuilder = Callable[[dict[str, Any]], WarpedSpec]

PRESETS: dict[str, WarpedBuilder] = {
    "hyperbolic_line": _hyperbolic_line,
    "cylinder_sphere": _cylinder_sphere,
    "cylinder_sphere_square": _cylinder_sphere_square,
    "polar3_linear": _polar3_linear,
    "polar4_height": _polar4_height,
    "polar4_wrong_radius": _polar4_wrong_radius,
    "line_torus_affine": _line_torus_affine,
    "line_torus_square": _line_torus_square,
    "hyperbolic_torus_cosh": _hyperbolic_torus_cosh,
    "polar3_radius": _polar3_radius,
    "conformal_radial": _conformal_radial,
}


def make_preset(name: str, params: dict[str, Any] | None = None) -> WarpedSpec:
    """Build a named warped example.

    Raises
    ------
    UnknownEntry
        If the preset is unknown.
    """
    builder = PRESETS.get(name)
    if builder is None:
        raise UnknownEntry(f"unknown warped preset {name!r}")
    return builder(dict(params or {}))
