"""Pointwise residuals of the Ricci-Hessian equation and its consequences."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from functools import lru_cache

import jax
import jax.numpy as jnp
import numpy as np
from numpy.typing import ArrayLike, NDArray

from rhlab.config import get_settings
from rhlab.exceptions import (
    CriticalPoint,
    NonconstantScalar,
    NotAlmostHermitian,
    PreconditionViolated,
    SignViolation,
)
from rhlab.geometry.curvature import (
    cholesky_frame,
    covector_norm,
    curvature_pack,
    divergence_sym2,
    operator_norm,
    ricci_power,
    scalar_derivatives,
    vector_norm,
)
from rhlab.geometry.fields import MetricField, RHInstance, ScalarField
from rhlab.types import (
    CodazziResult,
    CurvaturePack,
    LevelSetProbe,
    MuStats,
    ScalarDerivatives,
    SpectrumResult,
)

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]

IDENTITY_GATE = 1e-6
J_TOLERANCE = 1e-10
SCALAR_CONSTANCY = 1e-8
SPECTRUM_TOLERANCE = 1e-6


def _require(inst: RHInstance, point: ArrayLike) -> FloatArray:
    return inst.domain.require(point)


def _residual_scale(
    pack: CurvaturePack, derivatives: ScalarDerivatives
) -> float:
    ric_norm = operator_norm(pack.ric, pack.metric)
    return (1.0 + ric_norm) * (
        1.0 + abs(derivatives.value) + derivatives.gradient_norm
    )


def hessian_ricci_residual(
    metric: MetricField,
    f: ScalarField,
    point: ArrayLike,
    coefficient: float = -1.0,
    *,
    pack: CurvaturePack | None = None,
) -> float:
    """Return the spectral norm of ``nabla^2 f - c f Ric``.

    Parameters
    ----------
    metric : MetricField
        Metric.
    f : ScalarField
        Function.
    point : ArrayLike
        Chart point.
    coefficient : float, default=-1.0
        ``c``. The Ricci-Hessian equation uses ``-1``, the static equation
        ``+1`` and the ``(0, m)``-Einstein condition ``1 / (m - 1)``.
    pack : CurvaturePack | None, default=None
        Precomputed curvature at the point.

    Returns
    -------
    float
        Largest absolute eigenvalue of the residual endomorphism.
    """
    values = np.asarray(point, dtype=np.float64).reshape(-1)
    if pack is None:
        pack = curvature_pack(metric, values, order=2)
    derivatives = scalar_derivatives(metric, f, values, pack)
    residual = derivatives.hessian - coefficient * derivatives.value * pack.ric
    return operator_norm(residual, pack.metric)


def rh_residual(inst: RHInstance, point: ArrayLike) -> float:
    """Return the operator norm of ``nabla^2 f + f Ric``.

    Parameters
    ----------
    inst : RHInstance
        Metric and candidate solution.
    point : ArrayLike
        Admissible chart point.

    Returns
    -------
    float
        Residual; zero exactly where the equation holds.

    Raises
    ------
    PointExcluded
        If the point is not admissible.
    SingularMetric
        If the metric degenerates.
    """
    values = _require(inst, point)
    return hessian_ricci_residual(inst.metric, inst.f, values, -1.0)


def static_residual(inst: RHInstance, point: ArrayLike) -> float:
    """Return the operator norm of ``nabla^2 f - f Ric``."""
    values = _require(inst, point)
    return hessian_ricci_residual(inst.metric, inst.f, values, 1.0)


def mu(inst: RHInstance, point: ArrayLike) -> float:
    """Return ``f Lap f + 2 |grad f|^2`` with ``Lap = -tr nabla^2``.

    Parameters
    ----------
    inst : RHInstance
        Metric and function.
    point : ArrayLike
        Admissible chart point.

    Returns
    -------
    float
        Value of the mu invariant at the point.
    """
    values = _require(inst, point)
    derivatives = scalar_derivatives(inst.metric, inst.f, values)
    return (
        derivatives.value * derivatives.laplacian
        + 2.0 * derivatives.gradient_norm**2
    )


def mu_constancy(inst: RHInstance, points: Sequence[ArrayLike]) -> MuStats:
    """Sample the mu invariant and summarize its spread.

    Parameters
    ----------
    inst : RHInstance
        Metric and function.
    points : Sequence[ArrayLike]
        Ordered sample points.

    Returns
    -------
    MuStats
        Samples, mean and ``max - min`` spread.
    """
    samples = []
    for point in points:
        residual = rh_residual(inst, point)
        if residual > IDENTITY_GATE:
            logger.warning(
                "mu sampled off-solution",
                extra={"instance": inst.label, "residual": residual},
            )
        samples.append(mu(inst, point))
    return MuStats.from_samples(samples)


def identity_suite(inst: RHInstance, point: ArrayLike) -> dict[str, float]:
    """Evaluate the identities implied by the Ricci-Hessian equation.

    Parameters
    ----------
    inst : RHInstance
        Metric and solution.
    point : ArrayLike
        Admissible chart point.

    Returns
    -------
    dict[str, float]
        ``ricci_gradient``, ``trace_law``, ``ricci_norm`` and
        ``curvature_gradient`` residuals, each divided by
        ``(1 + |Ric|)(1 + |f| + |grad f|)``.

    Raises
    ------
    PreconditionViolated
        If the equation itself fails at the point.
    """
    values = _require(inst, point)
    pack = curvature_pack(inst.metric, values, order=max(4, get_settings().jet_order))
    derivatives = scalar_derivatives(inst.metric, inst.f, values, pack)
    f_value = derivatives.value
    grad = derivatives.gradient
    equation = derivatives.hessian + f_value * pack.ric
    if operator_norm(equation, pack.metric) >= IDENTITY_GATE:
        raise PreconditionViolated(
            f"{inst.label} does not solve the equation at {values.tolist()}"
        )
    g = pack.metric
    ricci_gradient = (
        pack.ric @ grad - 0.5 * pack.scal * grad - 0.25 * f_value * pack.grad_S
    )
    trace_law = derivatives.laplacian - f_value * pack.scal
    ric_norm_sq = float(np.trace(pack.ric @ pack.ric))
    lap_s = pack.lap_S if pack.lap_S is not None else 0.0
    ricci_norm = (
        f_value * ric_norm_sq
        - 0.5 * f_value * pack.scal**2
        + 0.25 * float(grad @ pack.d_scal)
        - 0.25 * f_value * lap_s
    )
    frame = cholesky_frame(g)
    worst = 0.0
    for a in range(pack.dim):
        for b in range(a + 1, pack.dim):
            x_vec, y_vec = frame[:, a], frame[:, b]
            curvature = np.einsum(
                "lkij,i,j,k->l", pack.riemann, x_vec, y_vec, grad
            )
            x_f = float(derivatives.differential @ x_vec)
            y_f = float(derivatives.differential @ y_vec)
            nabla_x = pack.metric_inv @ np.einsum(
                "mjk,m,k->j", pack.nabla_ric, x_vec, y_vec
            )
            nabla_y = pack.metric_inv @ np.einsum(
                "mjk,m,k->j", pack.nabla_ric, y_vec, x_vec
            )
            defect = (
                curvature
                + x_f * (pack.ric @ y_vec)
                - y_f * (pack.ric @ x_vec)
                + f_value * (nabla_x - nabla_y)
            )
            worst = max(worst, vector_norm(defect, g))
    scale = _residual_scale(pack, derivatives)
    return {
        "ricci_gradient": vector_norm(ricci_gradient, g) / scale,
        "trace_law": abs(trace_law) / scale,
        "ricci_norm": abs(ricci_norm) / scale,
        "curvature_gradient": worst / scale,
    }


@lru_cache(maxsize=64)
def conformal_partner(
    metric: MetricField, f: ScalarField, n: int
) -> tuple[MetricField, ScalarField]:
    """Return ``(e^{2u} g, u)`` with ``u = ln|f| / (2 - n)``.

    Parameters
    ----------
    metric : MetricField
        Metric ``g``.
    f : ScalarField
        Nowhere-vanishing function.
    n : int
        Dimension, greater than 2.

    Returns
    -------
    tuple[MetricField, ScalarField]
        Conformal metric and conformal factor exponent.
    """
    if n <= 2:
        raise PreconditionViolated("conformal reformulation needs n > 2")
    exponent = ScalarField(
        lambda x: jnp.log(jnp.abs(f.on(x))) / (2.0 - n), label=f"ln|{f.label}|/(2-n)"
    )
    base_components = metric.components

    def components(x: jax.Array) -> jax.Array:
        g = jnp.asarray(base_components(x), dtype=jnp.float64)
        return g * jnp.exp(2.0 * exponent.on(x))

    conformal = MetricField(
        dim=metric.dim,
        components=components,
        domain=metric.domain,
        periodic_axes=metric.periodic_axes,
        label=f"e^(2u)*{metric.label}",
        guard=metric.guard,
    )
    return conformal, exponent


def conformal_check(
    metric: MetricField, f: ScalarField, n: int, point: ArrayLike
) -> dict[str, float]:
    """Evaluate the conformal reformulation of the equation at a point.

    Parameters
    ----------
    metric : MetricField
        Metric ``g``.
    f : ScalarField
        Positive function.
    n : int
        Dimension, greater than 2.
    point : ArrayLike
        Admissible chart point.

    Returns
    -------
    dict[str, float]
        ``conformal_ricci`` (spectral norm of
        ``Ric' - (Lap' u) Id + (n-2)(n-3) du (x) grad' u``),
        ``conformal_laplacian`` (``|Lap' u + mu e^{2(n-3)u} / (n-2)|``),
        ``einstein`` (traceless Ricci of the partner metric, reported for
        ``n = 3``) and ``mu``.

    Raises
    ------
    SignViolation
        If ``f`` is not positive at the point.
    """
    values = metric.domain.require(point)
    if f(values) <= 0.0:
        raise SignViolation(f"{f.label} is not positive at {values.tolist()}")
    conformal, exponent = conformal_partner(metric, f, n)
    pack = curvature_pack(conformal, values, order=2)
    u = scalar_derivatives(conformal, exponent, values, pack)
    mu_value = mu(RHInstance(metric, f), values)
    du_du = np.outer(u.differential, u.differential)
    ricci_residual = (
        pack.ric_form
        - u.laplacian * pack.metric
        + (n - 2) * (n - 3) * du_du
    )
    laplacian_residual = u.laplacian + mu_value / (n - 2) * np.exp(
        2.0 * (n - 3) * u.value
    )
    result = {
        "conformal_ricci": operator_norm(pack.metric_inv @ ricci_residual, pack.metric),
        "conformal_laplacian": float(abs(laplacian_residual)),
        "mu": mu_value,
    }
    if n == 3:
        traceless = pack.ric - pack.scal / n * np.eye(n)
        result["einstein"] = operator_norm(traceless, pack.metric)
    return result


def snap_to_level(
    inst: RHInstance,
    point: ArrayLike,
    level: float = 0.0,
    *,
    max_iterations: int = 30,
    tolerance: float = 1e-14,
) -> FloatArray:
    """Move a chart point onto the level set ``f = level`` by Newton steps.

    Parameters
    ----------
    inst : RHInstance
        Metric and function.
    point : ArrayLike
        Starting chart point near the level set.
    level : float, default=0.0
        Target level.
    max_iterations : int, default=30
        Newton iteration cap.
    tolerance : float, default=1e-14
        Stop once ``|f - level|`` falls below this value.

    Returns
    -------
    numpy.ndarray
        Point with ``f(point) = level`` to the requested tolerance.

    Raises
    ------
    CriticalPoint
        If the gradient vanishes along the way.
    """
    current = np.asarray(point, dtype=np.float64).reshape(-1).copy()
    critical = get_settings().critical_gradient
    for _ in range(max_iterations):
        f_jet = inst.f.jet(current, 1)
        defect = float(f_jet.value) - level
        if abs(defect) <= tolerance:
            break
        g_inv = np.linalg.inv(inst.metric.matrix(current))
        grad = g_inv @ f_jet.d1
        norm_sq = float(f_jet.d1 @ grad)
        if norm_sq <= critical**2:
            raise CriticalPoint(f"gradient vanishes near {current.tolist()}")
        current = current - defect * grad / norm_sq
    return current


def level_set_probe(
    inst: RHInstance,
    point: ArrayLike,
    *,
    tol: float | None = None,
) -> LevelSetProbe:
    """Probe the level hypersurface of ``f`` through a point.

    Parameters
    ----------
    inst : RHInstance
        Metric and function.
    point : ArrayLike
        Admissible chart point; its level ``c = f(point)`` defines the
        hypersurface.
    tol : float | None, default=None
        Critical-gradient threshold; defaults to the configured one.

    Returns
    -------
    LevelSetProbe
        Normal, shape operator, intrinsic scalar curvature and the level-set
        Ricci residual.

    Raises
    ------
    CriticalPoint
        If ``|grad f| <= tol``.
    """
    values = _require(inst, point)
    tol = get_settings().critical_gradient if tol is None else tol
    pack = curvature_pack(inst.metric, values, order=3)
    derivatives = scalar_derivatives(inst.metric, inst.f, values, pack)
    grad_norm = derivatives.gradient_norm
    if grad_norm <= tol:
        raise CriticalPoint(f"|grad f| = {grad_norm:.3e} at {values.tolist()}")
    g = pack.metric
    normal = derivatives.gradient / grad_norm
    normal_flat = g @ normal
    projection = np.eye(pack.dim) - np.outer(normal, normal_flat)
    shape_full = -(projection @ derivatives.hessian @ projection) / grad_norm
    tangent = _tangent_frame(projection, g)
    weingarten = tangent.T @ g @ shape_full @ tangent
    asymmetry = 0.0
    if tangent.size:
        asymmetry = float(np.max(np.abs(weingarten - weingarten.T)))
    weingarten = 0.5 * (weingarten + weingarten.T)
    mean_curvature = float(np.trace(weingarten))
    norm_sq = float(np.sum(weingarten**2))
    ric_nn = float(normal @ pack.ric_form @ normal)
    scalar_n = pack.scal - 2.0 * ric_nn + mean_curvature**2 - norm_sq
    lowered = pack.riemann_lowered
    # Rm(X, nu, nu, Y) = g(R(X, nu) nu, Y) with Rm[l, k, i, j] = g(R(d_i, d_j) d_k, d_l)
    normal_curvature = np.einsum("lkij,j,k->il", lowered, normal, normal)
    ric_n = (
        tangent.T @ pack.ric_form @ tangent
        - tangent.T @ normal_curvature @ tangent
        + mean_curvature * weingarten
        - weingarten @ weingarten
    )
    nabla_normal = np.einsum("mjk,m->jk", pack.nabla_ric, normal)
    normal_term = tangent.T @ nabla_normal @ tangent
    target = ric_n + derivatives.value / grad_norm * normal_term
    ric_residual = float(np.linalg.norm(target, 2)) if target.size else 0.0
    return LevelSetProbe(
        point=values,
        level=derivatives.value,
        normal=normal,
        tangent_frame=tangent,
        weingarten=weingarten,
        scalar_curvature=float(scalar_n),
        ric_N_residual=ric_residual,
        weingarten_norm=(
            float(np.linalg.norm(weingarten, 2)) if weingarten.size else 0.0
        ),
        weingarten_asymmetry=asymmetry,
        normal_error=abs(float(normal @ normal_flat) - 1.0),
    )


def _tangent_frame(projection: FloatArray, g: FloatArray) -> FloatArray:
    """Orthonormal basis of the normal complement by Gram-Schmidt."""
    vectors: list[FloatArray] = []
    for column in range(g.shape[0]):
        candidate = projection[:, column].copy()
        for basis_vector in vectors:
            candidate = candidate - float(basis_vector @ g @ candidate) * basis_vector
        length = vector_norm(candidate, g)
        if length > 1e-8:
            vectors.append(candidate / length)
        if len(vectors) == g.shape[0] - 1:
            break
    if not vectors:
        return np.zeros((g.shape[0], 0))
    return np.stack(vectors, axis=1)


def detect_epsilon(inst: RHInstance, points: Sequence[ArrayLike]) -> float:
    """Return half the scalar curvature after checking it is constant.

    Parameters
    ----------
    inst : RHInstance
        Instance whose metric is probed.
    points : Sequence[ArrayLike]
        Sample points.

    Returns
    -------
    float
        ``S / 2``.

    Raises
    ------
    NonconstantScalar
        If the scalar curvature spread exceeds ``1e-8``.
    """
    scalars = [curvature_pack(inst.metric, point, order=2).scal for point in points]
    spread = max(scalars) - min(scalars)
    if spread > SCALAR_CONSTANCY:
        raise NonconstantScalar(f"scalar curvature spread {spread:.3e}")
    return float(np.mean(scalars)) / 2.0


def ricci_spectrum_check(
    inst: RHInstance, point: ArrayLike, epsilon: float
) -> SpectrumResult:
    """Check the Ricci spectrum pattern ``{eps, eps, 0, ..., 0}``.

    Parameters
    ----------
    inst : RHInstance
        Solution on a constant scalar curvature metric.
    point : ArrayLike
        Regular chart point.
    epsilon : float
        ``+1`` or ``-1``.

    Returns
    -------
    SpectrumResult
        Sorted eigenvalues, deviation and ``|Ric^T|^2``.

    Raises
    ------
    NonconstantScalar
        If ``S != 2 eps`` at the point.
    CriticalPoint
        If the gradient vanishes.
    """
    if abs(abs(epsilon) - 1.0) > SCALAR_CONSTANCY:
        raise PreconditionViolated(f"epsilon must be +1 or -1, got {epsilon}")
    values = _require(inst, point)
    pack = curvature_pack(inst.metric, values, order=2)
    if abs(pack.scal - 2.0 * epsilon) > SCALAR_CONSTANCY:
        raise NonconstantScalar(f"S = {pack.scal:.12g} differs from 2*{epsilon:g}")
    derivatives = scalar_derivatives(inst.metric, inst.f, values, pack)
    if derivatives.gradient_norm <= get_settings().critical_gradient:
        raise CriticalPoint(f"critical point at {values.tolist()}")
    frame = cholesky_frame(pack.metric)
    eigenvalues = np.sort(np.linalg.eigvalsh(frame.T @ pack.ric_form @ frame))
    expected = np.sort(np.array([epsilon, epsilon] + [0.0] * (pack.dim - 2)))
    error = float(np.max(np.abs(eigenvalues - expected)))
    normal = derivatives.gradient / derivatives.gradient_norm
    tangential = pack.ric - epsilon * np.outer(normal, pack.metric @ normal)
    norm_sq = float(np.trace(tangential @ tangential))
    return SpectrumResult(
        eigenvalues=tuple(float(v) for v in eigenvalues),
        expected=tuple(float(v) for v in expected),
        spectrum_error=error,
        tangential_norm_squared=norm_sq,
        passed=error < SPECTRUM_TOLERANCE and abs(norm_sq - 1.0) < SPECTRUM_TOLERANCE,
    )


def codazzi_and_traces(
    metric: MetricField, point: ArrayLike, s_max: int = 4
) -> CodazziResult:
    """Evaluate the harmonic-curvature conditions at a point.

    Parameters
    ----------
    metric : MetricField
        Metric.
    point : ArrayLike
        Admissible chart point.
    s_max : int, default=4
        Largest Ricci power examined.

    Returns
    -------
    CodazziResult
        Codazzi defect, traces of Ricci powers against ``2 eps^s`` with
        ``eps = S / 2``, and divergences of the lowered powers.
    """
    values = metric.domain.require(point)
    pack = curvature_pack(metric, values, max(3, get_settings().jet_order))
    frame = cholesky_frame(pack.metric)
    codazzi = 0.0
    for a in range(pack.dim):
        for b in range(a + 1, pack.dim):
            x_vec, y_vec = frame[:, a], frame[:, b]
            defect = np.einsum("mjk,m,k->j", pack.nabla_ric, x_vec, y_vec) - np.einsum(
                "mjk,m,k->j", pack.nabla_ric, y_vec, x_vec
            )
            codazzi = max(codazzi, covector_norm(defect, pack.metric_inv))
    epsilon = pack.scal / 2.0
    traces = []
    errors = []
    divergences = []
    power = np.eye(pack.dim)
    for s in range(1, s_max + 1):
        power = power @ pack.ric
        trace = float(np.trace(power))
        traces.append(trace)
        errors.append(abs(trace - 2.0 * epsilon**s))
        divergence = divergence_sym2(metric, ricci_power(s), values)
        divergences.append(covector_norm(divergence, pack.metric_inv))
    return CodazziResult(
        codazzi=codazzi,
        epsilon=epsilon,
        traces=tuple(traces),
        trace_errors=tuple(errors),
        divergences=tuple(divergences),
    )


def kahler_j_check(inst: RHInstance, point: ArrayLike) -> float:
    """Return ``|nabla^2 f o J - J o nabla^2 f|``.

    Parameters
    ----------
    inst : RHInstance
        Instance carrying an almost-complex structure.
    point : ArrayLike
        Admissible chart point.

    Returns
    -------
    float
        Spectral norm of the commutator.

    Raises
    ------
    NotAlmostHermitian
        If ``J^2 != -Id`` or ``J`` is not orthogonal.
    """
    if inst.complex_structure is None:
        raise PreconditionViolated(f"{inst.label} carries no complex structure")
    values = _require(inst, point)
    structure = np.asarray(inst.complex_structure(values), dtype=np.float64)
    g = inst.metric.matrix(values)
    identity = np.eye(inst.dim)
    if np.max(np.abs(structure @ structure + identity)) > J_TOLERANCE:
        raise NotAlmostHermitian(f"J^2 != -Id at {values.tolist()}")
    if np.max(np.abs(structure.T @ g @ structure - g)) > J_TOLERANCE * max(
        1.0, float(np.max(np.abs(g)))
    ):
        raise NotAlmostHermitian(f"J is not g-orthogonal at {values.tolist()}")
    derivatives = scalar_derivatives(inst.metric, inst.f, values)
    commutator = derivatives.hessian @ structure - structure @ derivatives.hessian
    return operator_norm(commutator, g)
