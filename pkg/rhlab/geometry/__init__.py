"""Chart geometry: jets, fields and curvature."""

from rhlab.geometry.curvature import (
    CurvatureFunctions,
    christoffel,
    curvature_functions,
    curvature_invariants,
    curvature_pack,
    divergence_sym2,
    gradient,
    hessian,
    laplacian,
    ricci_power,
    scalar_derivatives,
)
from rhlab.geometry.fields import (
    ChartDomain,
    Exclusion,
    MetricField,
    RHInstance,
    ScalarField,
    Space,
    evaluate_jet,
)
from rhlab.geometry.jet import Jet, taylor

__all__ = [
    "ChartDomain",
    "CurvatureFunctions",
    "Exclusion",
    "Jet",
    "MetricField",
    "RHInstance",
    "ScalarField",
    "Space",
    "christoffel",
    "curvature_functions",
    "curvature_invariants",
    "curvature_pack",
    "divergence_sym2",
    "evaluate_jet",
    "gradient",
    "hessian",
    "laplacian",
    "ricci_power",
    "scalar_derivatives",
    "taylor",
]
