"""Result types shared across services."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import StrEnum
from typing import Any

import numpy as np
from numpy.typing import NDArray

FloatArray = NDArray[np.float64]


@dataclass(frozen=True, slots=True)
class CurvaturePack:
    """Curvature data of a metric at one chart point.

    Attributes
    ----------
    point : numpy.ndarray
        Chart point.
    metric : numpy.ndarray
        ``g_ij``.
    metric_inv : numpy.ndarray
        ``g^ij``.
    gamma : numpy.ndarray
        Christoffel symbols ``gamma[k, i, j] = Gamma^k_ij``.
    riemann : numpy.ndarray
        ``riemann[l, k, i, j]`` is the ``l`` component of
        ``R(d_i, d_j) d_k = nabla_i nabla_j d_k - nabla_j nabla_i d_k``.
    ric : numpy.ndarray
        Ricci endomorphism ``Ric^a_b``.
    ric_form : numpy.ndarray
        Ricci bilinear form ``Ric_ab``.
    nabla_ric : numpy.ndarray
        ``nabla_ric[m, j, k] = (nabla_m Ric)_jk``.
    scal : float
        Scalar curvature.
    d_scal : numpy.ndarray
        Differential of the scalar curvature.
    grad_S : numpy.ndarray
        Gradient of the scalar curvature.
    lap_S : float | None
        ``-tr nabla^2 S`` when the jet order allows it.
    order : int
        Jet order the pack was computed with.
    """

    point: FloatArray
    metric: FloatArray
    metric_inv: FloatArray
    gamma: FloatArray
    riemann: FloatArray
    ric: FloatArray
    ric_form: FloatArray
    nabla_ric: FloatArray
    scal: float
    d_scal: FloatArray
    grad_S: FloatArray
    lap_S: float | None
    order: int

    @property
    def dim(self) -> int:
        """Return the manifold dimension."""
        return int(self.point.size)

    @property
    def riemann_lowered(self) -> FloatArray:
        """Return ``Rm[l, k, i, j] = g(R(d_i, d_j) d_k, d_l)``."""
        return np.einsum("lm,mkij->lkij", self.metric, self.riemann)


@dataclass(frozen=True, slots=True)
class ScalarDerivatives:
    """First and second covariant derivatives of a function at a point.

    Attributes
    ----------
    value : float
        Function value.
    differential : numpy.ndarray
        ``df``.
    gradient : numpy.ndarray
        Metric gradient.
    hessian_form : numpy.ndarray
        Covariant Hessian as a bilinear form.
    hessian : numpy.ndarray
        Hessian endomorphism.
    laplacian : float
        ``-tr hessian``.
    gradient_norm : float
        Metric norm of the gradient.
    """

    value: float
    differential: FloatArray
    gradient: FloatArray
    hessian_form: FloatArray
    hessian: FloatArray
    laplacian: float
    gradient_norm: float


@dataclass(frozen=True, slots=True)
class MuStats:
    """Samples and summary of the mu invariant.

    Attributes
    ----------
    samples : tuple[float, ...]
        Values at the sample points, in point order.
    mean : float
        Sample mean.
    spread : float
        ``max - min`` over the samples.
    """

    samples: tuple[float, ...]
    mean: float
    spread: float

    @classmethod
    def from_samples(cls, samples: list[float]) -> MuStats:
        """Summarize a list of samples."""
        values = np.asarray(samples, dtype=np.float64)
        return cls(
            samples=tuple(float(v) for v in values),
            mean=float(values.mean()),
            spread=float(values.max() - values.min()),
        )


@dataclass(frozen=True, slots=True)
class LevelSetProbe:
    """Extrinsic and intrinsic data of a level hypersurface at one point.

    Attributes
    ----------
    point : numpy.ndarray
        Base point on the level set.
    level : float
        Level ``c`` with ``f(point) = c``.
    normal : numpy.ndarray
        Unit normal ``grad f / |grad f|``.
    tangent_frame : numpy.ndarray
        Orthonormal tangent frame, one vector per column.
    weingarten : numpy.ndarray
        Shape operator in the tangent frame.
    scalar_curvature : float
        Intrinsic scalar curvature from the Gauss equation.
    ric_N_residual : float
        Spectral norm of ``Ric_N + (f/|grad f|) nabla_nu Ric`` on the tangent
        space.
    weingarten_norm : float
        Spectral norm of the shape operator.
    weingarten_asymmetry : float
        Deviation of the shape operator from symmetry.
    normal_error : float
        ``|g(nu, nu) - 1|``.
    """

    point: FloatArray
    level: float
    normal: FloatArray
    tangent_frame: FloatArray
    weingarten: FloatArray
    scalar_curvature: float
    ric_N_residual: float
    weingarten_norm: float
    weingarten_asymmetry: float
    normal_error: float


@dataclass(frozen=True, slots=True)
class SpectrumResult:
    """Ricci spectrum rigidity data.

    Attributes
    ----------
    eigenvalues : tuple[float, ...]
        Ricci eigenvalues in increasing order.
    expected : tuple[float, ...]
        The pattern ``{eps, eps, 0, ..., 0}`` sorted.
    spectrum_error : float
        Largest deviation from the expected pattern.
    tangential_norm_squared : float
        ``|Ric^T|^2`` with ``Ric^T = Ric - eps nu (x) nu``.
    passed : bool
        Whether both checks hold within tolerance.
    """

    eigenvalues: tuple[float, ...]
    expected: tuple[float, ...]
    spectrum_error: float
    tangential_norm_squared: float
    passed: bool


@dataclass(frozen=True, slots=True)
class CodazziResult:
    """Harmonic-curvature data at one point.

    Attributes
    ----------
    codazzi : float
        Largest Codazzi defect over orthonormal frame pairs.
    epsilon : float
        Half the scalar curvature.
    traces : tuple[float, ...]
        ``tr Ric^s`` for ``s = 1..s_max``.
    trace_errors : tuple[float, ...]
        ``|tr Ric^s - 2 eps^s|``.
    divergences : tuple[float, ...]
        Metric norm of ``delta(Ric^s)``.
    """

    codazzi: float
    epsilon: float
    traces: tuple[float, ...]
    trace_errors: tuple[float, ...]
    divergences: tuple[float, ...]


class OdeKind(StrEnum):
    """One-dimensional reductions handled by the ODE laboratory."""

    BASE_SECOND_ORDER = "base_second_order"
    BASE_FIRST_ORDER = "base_first_order"
    FIBER_FIRST_ORDER = "fiber_first_order"
    GRADIENT = "gradient"
    LINE_WARP = "line_warp"
    POISSON_RADIAL = "poisson_radial"
    CLOSED_FAMILY = "closed_family"


@dataclass(frozen=True, slots=True)
class OdeProfile:
    """Sampled solution of a one-dimensional reduction.

    Attributes
    ----------
    grid : numpy.ndarray
        Strictly increasing parameter values.
    u : numpy.ndarray
        Solution values.
    du : numpy.ndarray
        Derivative values.
    kind : OdeKind
        Reduction kind.
    params : dict[str, Any]
        Parameters echoed from the request.
    stats : dict[str, Any]
        Integrator statistics (steps, evaluations, boundary event).
    """

    grid: FloatArray
    u: FloatArray
    du: FloatArray
    kind: OdeKind
    params: dict[str, Any] = field(default_factory=dict)
    stats: dict[str, Any] = field(default_factory=dict)

    @property
    def boundary(self) -> str | None:
        """Return the boundary event that stopped the integration, if any."""
        return self.stats.get("boundary")

    def to_rows(self) -> list[tuple[float, float, float]]:
        """Return ``(t, u, u')`` rows for CSV export."""
        return [
            (float(t), float(u), float(du))
            for t, u, du in zip(self.grid, self.u, self.du)
        ]


@dataclass(frozen=True, slots=True)
class ExtensionData:
    """Matrix data of a one-dimensional extension.

    Attributes
    ----------
    S_mat : numpy.ndarray
        Symmetric part of the derivation.
    A_mat : numpy.ndarray
        Skew part of the derivation.
    ric_N : numpy.ndarray
        Ricci endomorphism of the base.
    div_S : numpy.ndarray
        Divergence of the symmetric part.
    epsilon : int
        Sign ``+1`` or ``-1``.
    """

    S_mat: FloatArray
    A_mat: FloatArray
    ric_N: FloatArray
    div_S: FloatArray
    epsilon: int

    @property
    def dim(self) -> int:
        """Return the base dimension ``m``."""
        return int(self.S_mat.shape[0])
