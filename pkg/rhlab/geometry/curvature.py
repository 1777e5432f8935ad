"""Levi-Civita connection, curvature and covariant derivatives.

Every quantity is a :mod:`jax.numpy` function of the chart point. Covariant
derivatives of curvature come from :func:`jax.jacfwd` of those functions and
the resulting programs are compiled once per metric.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass
from functools import lru_cache

import jax
import jax.numpy as jnp
import numpy as np
from numpy.typing import ArrayLike, NDArray

from rhlab.config import get_settings
from rhlab.exceptions import NonFiniteValue, SingularMetric
from rhlab.geometry.fields import MetricField, ScalarField
from rhlab.geometry.jet import ChartFunction, as_array, taylor
from rhlab.types import CurvaturePack, ScalarDerivatives

FloatArray = NDArray[np.float64]
PointFunction = Callable[[jax.Array], jax.Array]

_MIN_EIGENVALUE = 1e-10
_SYMMETRY_TOLERANCE = 1e-12
_CACHE_SIZE = 256


@dataclass(frozen=True, slots=True)
class CurvatureFunctions:
    """Connection and curvature of a metric as functions of the chart point.

    Attributes
    ----------
    metric, metric_inv : Callable[[jax.Array], jax.Array]
        ``g_ij`` and ``g^ij``.
    gamma : Callable[[jax.Array], jax.Array]
        ``Gamma^k_ij`` indexed ``[k, i, j]``.
    riemann : Callable[[jax.Array], jax.Array]
        ``R^l_kij`` indexed ``[l, k, i, j]``.
    ricci : Callable[[jax.Array], jax.Array]
        ``Ric_jk = R^i_kij``.
    scalar : Callable[[jax.Array], jax.Array]
        Scalar curvature.
    """

    metric: PointFunction
    metric_inv: PointFunction
    gamma: PointFunction
    riemann: PointFunction
    ricci: PointFunction
    scalar: PointFunction


SymmetricTensorField = Callable[[CurvatureFunctions], PointFunction]


@lru_cache(maxsize=_CACHE_SIZE)
def curvature_functions(components: ChartFunction) -> CurvatureFunctions:
    """Build the curvature functions of a metric from its components."""
    metric = as_array(components)
    d_metric = jax.jacfwd(metric)

    def metric_inv(x: jax.Array) -> jax.Array:
        return jnp.linalg.inv(metric(x))

    def gamma(x: jax.Array) -> jax.Array:
        dg = d_metric(x)
        first_kind = 0.5 * (
            jnp.einsum("jli->lij", dg)
            + jnp.einsum("ilj->lij", dg)
            - jnp.einsum("ijl->lij", dg)
        )
        return jnp.einsum("kl,lij->kij", metric_inv(x), first_kind)

    d_gamma = jax.jacfwd(gamma)

    def riemann(x: jax.Array) -> jax.Array:
        connection = gamma(x)
        dc = d_gamma(x)
        return (
            jnp.einsum("ljki->lkij", dc)
            - jnp.einsum("likj->lkij", dc)
            + jnp.einsum("lim,mjk->lkij", connection, connection)
            - jnp.einsum("ljm,mik->lkij", connection, connection)
        )

    def ricci(x: jax.Array) -> jax.Array:
        return jnp.einsum("ikij->jk", riemann(x))

    def scalar(x: jax.Array) -> jax.Array:
        return jnp.einsum("jk,jk->", metric_inv(x), ricci(x))

    return CurvatureFunctions(metric, metric_inv, gamma, riemann, ricci, scalar)


def covariant_derivative_sym2(
    tensor: ArrayLike, partial: ArrayLike, gamma: ArrayLike
) -> jax.Array:
    """Covariant derivative of a symmetric bilinear form.

    Parameters
    ----------
    tensor : ArrayLike
        ``T_jk``.
    partial : ArrayLike
        ``partial[j, k, m] = d_m T_jk``.
    gamma : ArrayLike
        Christoffel symbols.

    Returns
    -------
    jax.Array
        ``nabla[m, j, k] = (nabla_m T)_jk``.
    """
    return (
        jnp.einsum("jkm->mjk", partial)
        - jnp.einsum("amj,ak->mjk", gamma, tensor)
        - jnp.einsum("amk,ja->mjk", gamma, tensor)
    )


@lru_cache(maxsize=_CACHE_SIZE)
def _curvature_program(
    components: ChartFunction, order: int
) -> Callable[[jax.Array], dict[str, jax.Array]]:
    fns = curvature_functions(components)
    d_ricci = jax.jacfwd(fns.ricci)
    d_scalar = jax.jacfwd(fns.scalar)
    hess_scalar = jax.jacfwd(d_scalar)

    @jax.jit
    def program(x: jax.Array) -> dict[str, jax.Array]:
        out = {
            "metric_inv": fns.metric_inv(x),
            "gamma": fns.gamma(x),
            "riemann": fns.riemann(x),
            "ricci": fns.ricci(x),
            "scalar": fns.scalar(x),
        }
        if order >= 3:
            out["d_ricci"] = d_ricci(x)
            out["d_scalar"] = d_scalar(x)
        if order >= 4:
            out["hess_scalar"] = hess_scalar(x)
        return out

    return program


def _validated_metric(metric: MetricField, point: FloatArray) -> FloatArray:
    value = metric.matrix(point)
    scale = max(1.0, float(np.max(np.abs(value))))
    if np.max(np.abs(value - value.T)) > _SYMMETRY_TOLERANCE * scale:
        raise SingularMetric(f"{metric.label} is not symmetric at {point.tolist()}")
    eigenvalues = np.linalg.eigvalsh(value)
    if eigenvalues[0] <= _MIN_EIGENVALUE:
        raise SingularMetric(
            f"{metric.label} is not positive definite at {point.tolist()} "
            f"(min eigenvalue {eigenvalues[0]:.3e})"
        )
    return value


def _finite(
    values: dict[str, jax.Array], label: str, point: FloatArray
) -> dict[str, FloatArray]:
    arrays = {key: np.array(value, dtype=np.float64) for key, value in values.items()}
    for key, value in arrays.items():
        if not np.all(np.isfinite(value)):
            raise NonFiniteValue(f"{key} of {label} not finite at {point.tolist()}")
    return arrays


def christoffel(metric: MetricField, point: ArrayLike) -> FloatArray:
    """Return the Christoffel symbols ``Gamma^k_ij`` at a point.

    Parameters
    ----------
    metric : MetricField
        Metric.
    point : ArrayLike
        Chart point.

    Returns
    -------
    numpy.ndarray
        Array indexed ``[k, i, j]``, symmetric in ``(i, j)``.

    Raises
    ------
    SingularMetric
        If the metric is not invertible.
    """
    values = metric.check(point)
    _validated_metric(metric, values)
    gamma = taylor(curvature_functions(metric.components).gamma, values, 0).value
    if not np.all(np.isfinite(gamma)):
        raise NonFiniteValue(f"connection of {metric.label} not finite at {values}")
    return gamma


def curvature_pack(
    metric: MetricField, point: ArrayLike, order: int | None = None
) -> CurvaturePack:
    """Return the curvature pack of a metric at a point.

    Parameters
    ----------
    metric : MetricField
        Metric.
    point : ArrayLike
        Chart point.
    order : int | None, default=None
        Highest metric derivative used, at least 2. Order 3 adds
        ``nabla Ric`` and ``nabla S``; order 4 adds the Laplacian of ``S``.
        Defaults to the configured ``jet_order``.

    Returns
    -------
    CurvaturePack
        Curvature data at the point.

    Raises
    ------
    SingularMetric
        If the metric is not symmetric positive definite.
    NonFiniteValue
        If any derivative is not finite.
    """
    order = get_settings().jet_order if order is None else int(order)
    if order < 2:
        raise ValueError("curvature needs metric derivatives of order 2 or more")
    values = metric.check(point)
    g = _validated_metric(metric, values)
    raw = _curvature_program(metric.components, order)(jnp.asarray(values))
    data = _finite(raw, metric.label, values)
    g_inv = data["metric_inv"]
    gamma = data["gamma"]
    ricci = data["ricci"]
    ric_form = 0.5 * (ricci + ricci.T)
    nabla_ric = np.zeros((metric.dim,) * 3)
    d_scal = np.zeros(metric.dim)
    lap_s: float | None = None
    if order >= 3:
        nabla_ric = np.asarray(
            covariant_derivative_sym2(ricci, data["d_ricci"], gamma), dtype=np.float64
        )
        d_scal = data["d_scalar"]
    if order >= 4:
        hess_s = data["hess_scalar"] - np.einsum("kij,k->ij", gamma, d_scal)
        lap_s = float(-np.einsum("ij,ij->", g_inv, hess_s))
    return CurvaturePack(
        point=values,
        metric=g,
        metric_inv=g_inv,
        gamma=gamma,
        riemann=data["riemann"],
        ric=g_inv @ ric_form,
        ric_form=ric_form,
        nabla_ric=nabla_ric,
        scal=float(data["scalar"]),
        d_scal=d_scal,
        grad_S=g_inv @ d_scal,
        lap_S=lap_s,
        order=order,
    )


def scalar_derivatives(
    metric: MetricField,
    f: ScalarField,
    point: ArrayLike,
    pack: CurvaturePack | None = None,
) -> ScalarDerivatives:
    """Return value, gradient, Hessian and Laplacian of a function.

    Parameters
    ----------
    metric : MetricField
        Metric.
    f : ScalarField
        Function.
    point : ArrayLike
        Chart point.
    pack : CurvaturePack | None, default=None
        Precomputed pack at the same point, reused for its connection.

    Returns
    -------
    ScalarDerivatives
        Derivative data; the Laplacian is ``-tr_g nabla^2 f``.
    """
    values = np.asarray(point, dtype=np.float64).reshape(-1)
    if pack is None:
        gamma = christoffel(metric, values)
        g = metric.matrix(values)
        g_inv = np.linalg.inv(g)
    else:
        gamma, g, g_inv = pack.gamma, pack.metric, pack.metric_inv
    f_jet = f.jet(values, 2)
    df = f_jet.d1
    hess_form = f_jet.d2 - np.einsum("kij,k->ij", gamma, df)
    hess_form = 0.5 * (hess_form + hess_form.T)
    grad = g_inv @ df
    hess = g_inv @ hess_form
    return ScalarDerivatives(
        value=float(f_jet.value),
        differential=df,
        gradient=grad,
        hessian_form=hess_form,
        hessian=hess,
        laplacian=float(-np.trace(hess)),
        gradient_norm=float(np.sqrt(max(float(df @ grad), 0.0))),
    )


def hessian(metric: MetricField, f: ScalarField, point: ArrayLike) -> FloatArray:
    """Return the Hessian endomorphism of ``f``.

    Parameters
    ----------
    metric : MetricField
        Metric.
    f : ScalarField
        Function.
    point : ArrayLike
        Chart point.

    Returns
    -------
    numpy.ndarray
        ``(nabla^2 f)^a_b``.
    """
    return scalar_derivatives(metric, f, point).hessian


def gradient(metric: MetricField, f: ScalarField, point: ArrayLike) -> FloatArray:
    """Return the metric gradient of ``f``."""
    return scalar_derivatives(metric, f, point).gradient


def laplacian(metric: MetricField, f: ScalarField, point: ArrayLike) -> float:
    """Return ``-tr_g nabla^2 f``."""
    return scalar_derivatives(metric, f, point).laplacian


@lru_cache(maxsize=16)
def ricci_power(power: int) -> SymmetricTensorField:
    """Return a builder of the lowered ``s``-th power of Ricci.

    Parameters
    ----------
    power : int
        Exponent ``s >= 1``.

    Returns
    -------
    Callable[[CurvatureFunctions], Callable[[jax.Array], jax.Array]]
        Maps curvature functions to ``x -> g(Ric^s ., .)``.
    """
    if power < 1:
        raise ValueError("Ricci power must be at least 1")

    def build(fns: CurvatureFunctions) -> PointFunction:
        def tensor(x: jax.Array) -> jax.Array:
            ric = fns.ricci(x)
            endo = fns.metric_inv(x) @ ric
            result = ric
            for _ in range(power - 1):
                result = result @ endo
            return result

        return tensor

    return build


@lru_cache(maxsize=_CACHE_SIZE)
def _divergence_program(
    components: ChartFunction, tensor: SymmetricTensorField
) -> PointFunction:
    fns = curvature_functions(components)
    field = tensor(fns)
    d_field = jax.jacfwd(field)

    @jax.jit
    def divergence(x: jax.Array) -> jax.Array:
        nabla = covariant_derivative_sym2(field(x), d_field(x), fns.gamma(x))
        return -jnp.einsum("ik,ikj->j", fns.metric_inv(x), nabla)

    return divergence


def divergence_sym2(
    metric: MetricField, tensor: SymmetricTensorField, point: ArrayLike
) -> FloatArray:
    """Return the divergence ``delta T_j = -g^ik (nabla_i T)_kj``.

    Parameters
    ----------
    metric : MetricField
        Metric.
    tensor : Callable[[CurvatureFunctions], Callable[[jax.Array], jax.Array]]
        Builds the symmetric form from curvature functions, e.g.
        ``ricci_power(1)``.
    point : ArrayLike
        Chart point.

    Returns
    -------
    numpy.ndarray
        Covector ``delta T``.

    Raises
    ------
    SingularMetric
        If the metric is not symmetric positive definite.
    NonFiniteValue
        If the divergence is not finite.
    """
    values = metric.check(point)
    _validated_metric(metric, values)
    raw = _divergence_program(metric.components, tensor)(jnp.asarray(values))
    return _finite({"divergence": raw}, metric.label, values)["divergence"]


def cholesky_frame(g: FloatArray) -> FloatArray:
    """Return the Gram-Schmidt orthonormalization of the coordinate frame.

    Parameters
    ----------
    g : numpy.ndarray
        Metric matrix.

    Returns
    -------
    numpy.ndarray
        Upper-triangular matrix whose columns are orthonormal vectors.
    """
    lower = np.linalg.cholesky(g)
    return np.linalg.inv(lower).T


def operator_norm(endomorphism: FloatArray, g: FloatArray) -> float:
    """Return the spectral norm of an endomorphism with respect to ``g``."""
    lower = np.linalg.cholesky(g)
    orthonormal = lower.T @ endomorphism @ np.linalg.inv(lower).T
    return float(np.linalg.norm(orthonormal, 2))


def vector_norm(vector: FloatArray, g: FloatArray) -> float:
    """Return the metric norm of a tangent vector."""
    return float(np.sqrt(max(float(vector @ g @ vector), 0.0)))


def covector_norm(covector: FloatArray, g_inv: FloatArray) -> float:
    """Return the metric norm of a covector."""
    return float(np.sqrt(max(float(covector @ g_inv @ covector), 0.0)))


def curvature_invariants(
    metric: MetricField, point: ArrayLike, order: int | None = None
) -> dict[str, float]:
    """Return relative defects of the algebraic curvature identities.

    Parameters
    ----------
    metric : MetricField
        Metric.
    point : ArrayLike
        Chart point.
    order : int | None, default=None
        Highest metric derivative used, at least 3.

    Returns
    -------
    dict[str, float]
        ``antisymmetry``, ``bianchi_first``, ``ricci_trace`` and
        ``contracted_bianchi`` defects.
    """
    order = max(3, get_settings().jet_order if order is None else order)
    pack = curvature_pack(metric, point, order)
    riemann = pack.riemann
    lowered = pack.riemann_lowered
    scale = 1.0 + float(np.max(np.abs(lowered)))
    antisymmetry = max(
        float(np.max(np.abs(lowered + np.swapaxes(lowered, 2, 3)))),
        float(np.max(np.abs(lowered + np.swapaxes(lowered, 0, 1)))),
    )
    cyclic = (
        riemann
        + np.transpose(riemann, (0, 3, 1, 2))
        + np.transpose(riemann, (0, 2, 3, 1))
    )
    ric_scale = 1.0 + abs(pack.scal)
    divergence = divergence_sym2(metric, ricci_power(1), point)
    contracted = covector_norm(divergence + 0.5 * pack.d_scal, pack.metric_inv)
    return {
        "antisymmetry": antisymmetry / scale,
        "bianchi_first": float(np.max(np.abs(cyclic))) / scale,
        "ricci_trace": abs(float(np.trace(pack.ric)) - pack.scal) / ric_scale,
        "contracted_bianchi": contracted
        / (1.0 + covector_norm(pack.d_scal, pack.metric_inv)),
    }
