"""Algebraic conditions for ``f = e^t`` on a one-dimensional extension ``N x R``.

The extension is described by the symmetric part ``S`` and the skew part
``A`` of its derivation, a candidate Ricci endomorphism ``Ric_N`` of the base
and the divergence ``div S``. All norms are Frobenius norms.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np
from numpy.typing import NDArray

from rhlab.exceptions import BadParams, ZeroSymmetricPart
from rhlab.types import ExtensionData

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]

EXTENSION_TOLERANCE = 1e-10
_SYMMETRY_TOLERANCE = 1e-12


@dataclass(frozen=True, slots=True)
class ExtensionConditions:
    """Residuals of the extension system for one sign.

    Attributes
    ----------
    alpha : float
        ``epsilon / |S|``.
    res_div : float
        ``|div S|``.
    res_ric : float
        ``|Ric_N - |S|^-2 ((tr S + epsilon |S|) S + [S, A])|``.
    passed : bool
        Whether both residuals are below :data:`EXTENSION_TOLERANCE`.
    """

    alpha: float
    res_div: float
    res_ric: float
    passed: bool


@dataclass(frozen=True, slots=True)
class ExtensionRicci:
    """Ricci tensor of the extension in the splitting ``TN + R xi``.

    Attributes
    ----------
    ric_xi_xi : float
        ``-alpha^2 tr(S^2)``.
    ric_mixed : numpy.ndarray
        ``ric(X, xi) = alpha div S(X)``.
    ric_block : numpy.ndarray
        ``Ric_N - alpha^2 tr(S) S - alpha^2 [S, A]``.
    scalar : float
        Ambient scalar curvature.
    mu : float
        ``mu(e^t)`` at ``t = 0``.
    rh_residual : float
        Frobenius norm of ``nabla^2 f + f Ric`` at ``t = 0``, using
        ``nabla^2 f = f (dt^2 - alpha g(S., .))``.
    """

    ric_xi_xi: float
    ric_mixed: FloatArray
    ric_block: FloatArray
    scalar: float
    mu: float
    rh_residual: float

    def ambient(self) -> FloatArray:
        """Return the full ``(m + 1)``-square Ricci matrix, ``xi`` first."""
        size = self.ric_block.shape[0] + 1
        matrix = np.zeros((size, size))
        matrix[0, 0] = self.ric_xi_xi
        matrix[0, 1:] = self.ric_mixed
        matrix[1:, 0] = self.ric_mixed
        matrix[1:, 1:] = self.ric_block
        return matrix


def _matrix(value: object) -> FloatArray:
    return np.atleast_2d(np.asarray(value, dtype=np.float64))


def make_extension(
    S_mat: object,
    A_mat: object | None = None,
    ric_N: object | None = None,
    div_S: object | None = None,
    epsilon: int = -1,
) -> ExtensionData:
    """Build validated extension data from nested sequences.

    Missing ``A``, ``Ric_N`` and ``div S`` default to zero.

    Raises
    ------
    BadParams
        If shapes disagree, ``S`` is not symmetric, ``A`` is not skew or
        ``epsilon`` is not ``+-1``.
    """
    S = _matrix(S_mat)
    m = S.shape[0]
    A = np.zeros((m, m)) if A_mat is None else _matrix(A_mat)
    ric = np.zeros((m, m)) if ric_N is None else _matrix(ric_N)
    div = np.zeros(m) if div_S is None else np.asarray(div_S, float).reshape(-1)
    data = ExtensionData(S, A, ric, div, int(epsilon))
    validate_extension(data)
    return data


def validate_extension(data: ExtensionData) -> None:
    """Check shapes and symmetries of extension data.

    Raises
    ------
    BadParams
        If the data is malformed.
    """
    m = data.dim
    named = (("S", data.S_mat), ("A", data.A_mat), ("Ric_N", data.ric_N))
    for name, matrix in named:
        if matrix.shape != (m, m):
            raise BadParams(f"{name} has shape {matrix.shape}, expected {(m, m)}")
    if data.div_S.shape != (m,):
        raise BadParams(f"div S has shape {data.div_S.shape}, expected {(m,)}")
    if np.max(np.abs(data.S_mat - data.S_mat.T)) > _SYMMETRY_TOLERANCE:
        raise BadParams("S must be symmetric")
    if np.max(np.abs(data.A_mat + data.A_mat.T)) > _SYMMETRY_TOLERANCE:
        raise BadParams("A must be skew")
    if np.max(np.abs(data.ric_N - data.ric_N.T)) > _SYMMETRY_TOLERANCE:
        raise BadParams("Ric_N must be symmetric")
    if data.epsilon not in (1, -1):
        raise BadParams(f"epsilon must be +1 or -1, got {data.epsilon}")


def _norm(data: ExtensionData) -> float:
    norm = float(np.linalg.norm(data.S_mat, "fro"))
    if norm == 0.0:
        raise ZeroSymmetricPart("symmetric part of the derivation vanishes")
    return norm


def _commutator(data: ExtensionData) -> FloatArray:
    return data.S_mat @ data.A_mat - data.A_mat @ data.S_mat


def extension_conditions(data: ExtensionData) -> ExtensionConditions:
    """Evaluate the two conditions for ``f = e^t`` to solve the equation.

    Parameters
    ----------
    data : ExtensionData
        Matrix data with a fixed sign ``epsilon``.

    Returns
    -------
    ExtensionConditions
        ``alpha`` and both residuals.

    Raises
    ------
    ZeroSymmetricPart
        If ``S = 0``.
    """
    validate_extension(data)
    norm = _norm(data)
    target = solved_base_ricci(data)
    res_div = float(np.linalg.norm(data.div_S))
    res_ric = float(np.linalg.norm(data.ric_N - target, "fro"))
    passed = res_div < EXTENSION_TOLERANCE and res_ric < EXTENSION_TOLERANCE
    return ExtensionConditions(data.epsilon / norm, res_div, res_ric, passed)


def extension_ricci(data: ExtensionData, alpha: float | None = None) -> ExtensionRicci:
    """Return the ambient Ricci tensor of the extension and its consequences.

    Parameters
    ----------
    data : ExtensionData
        Matrix data.
    alpha : float | None, default=None
        Scale of the derivation; defaults to ``epsilon / |S|``.

    Returns
    -------
    ExtensionRicci
        Ricci blocks, scalar curvature, ``mu`` and the residual of the
        equation for ``f = e^t`` at ``t = 0``.
    """
    validate_extension(data)
    if alpha is None:
        alpha = data.epsilon / _norm(data)
    S = data.S_mat
    square = alpha * alpha
    ric_xi_xi = -square * float(np.trace(S @ S))
    mixed = alpha * data.div_S
    block = data.ric_N - square * float(np.trace(S)) * S - square * _commutator(data)
    result = ExtensionRicci(ric_xi_xi, mixed, block, 0.0, 0.0, 0.0)
    ricci = result.ambient()
    hessian = np.zeros_like(ricci)
    hessian[0, 0] = 1.0
    hessian[1:, 1:] = -alpha * S
    laplacian = -float(np.trace(hessian))
    return replace(
        result,
        scalar=float(np.trace(ricci)),
        mu=laplacian + 2.0,
        rh_residual=float(np.linalg.norm(hessian + ricci, "fro")),
    )


def both_signs(data: ExtensionData) -> dict[int, ExtensionConditions]:
    """Evaluate the conditions for ``epsilon = +1`` and ``-1``."""
    return {
        sign: extension_conditions(replace(data, epsilon=sign)) for sign in (1, -1)
    }


def scaled_extension(data: ExtensionData, factor: float) -> ExtensionData:
    """Return the data of the derivation scaled by ``factor > 0``.

    ``S`` and ``A`` scale together; the conditions are homogeneous of degree
    zero in them, so the verdict is unchanged and ``alpha`` scales by
    ``1 / factor``.
    """
    if factor <= 0.0:
        raise BadParams("scale factor must be positive")
    return replace(data, S_mat=factor * data.S_mat, A_mat=factor * data.A_mat)


def solved_base_ricci(data: ExtensionData) -> FloatArray:
    """Return the ``Ric_N`` that satisfies the second condition exactly."""
    norm = _norm(data)
    trace = float(np.trace(data.S_mat))
    return ((trace + data.epsilon * norm) * data.S_mat + _commutator(data)) / norm**2
