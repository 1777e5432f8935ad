"""Numerical laboratory for the Ricci-Hessian equation."""

from rhlab.exceptions import ConfigError, ReportIoError, RicciHessianError
from rhlab.geometry.fields import ChartDomain, MetricField, RHInstance, ScalarField

__version__ = "0.1.0"

__all__ = [
    "ChartDomain",
    "ConfigError",
    "MetricField",
    "RHInstance",
    "ReportIoError",
    "RicciHessianError",
    "ScalarField",
    "__version__",
]
