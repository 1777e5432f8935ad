"""Library exception types."""

from __future__ import annotations


class RicciHessianError(Exception):
    """Base library error.

    Parameters
    ----------
    message : str
        Error message.
    exit_code : int | None, default=None
        Process exit code the CLI reports for this error. Falls back to the
        class-level default.
    """

    exit_code: int = 3

    def __init__(self, message: str, exit_code: int | None = None) -> None:
        if exit_code is not None:
            self.exit_code = exit_code
        super().__init__(message)


class ConfigError(RicciHessianError):
    """Scenario or command-line configuration is invalid.

    Parameters
    ----------
    message : str
        Error message.
    field : str | None, default=None
        Dotted location of the offending field.
    line : int | None, default=None
        Line number in the scenario file, when known.
    """

    exit_code = 2

    def __init__(
        self,
        message: str,
        field: str | None = None,
        line: int | None = None,
    ) -> None:
        self.field = field
        self.line = line
        super().__init__(message)


class PointExcluded(RicciHessianError):
    """Point lies outside the chart domain or inside an exclusion."""


class NonFiniteValue(RicciHessianError):
    """Evaluation produced NaN or infinity."""


class SingularMetric(RicciHessianError):
    """Metric matrix is not symmetric positive definite."""


class PreconditionViolated(RicciHessianError):
    """Check was requested where its hypothesis does not hold."""


class SignViolation(RicciHessianError):
    """Function expected to be positive is not."""


class CriticalPoint(RicciHessianError):
    """Gradient is too small for gradient-direction quantities."""


class NonconstantScalar(RicciHessianError):
    """Scalar curvature is not the expected constant."""


class NotAlmostHermitian(RicciHessianError):
    """Endomorphism field is not an orthogonal almost-complex structure."""


class UnknownEntry(RicciHessianError):
    """Name does not resolve to a known space, solution, or check."""


class BadParams(RicciHessianError):
    """Parameters are outside their admissible range."""


class IncompatiblePair(RicciHessianError):
    """Solution is not defined on the requested space."""


class NonPositiveWarp(RicciHessianError):
    """Warping function is not positive at a sampled base point."""


class CaseMismatch(RicciHessianError):
    """Warped data does not match the requested reduction case."""


class ZeroDivisionSample(RicciHessianError):
    """Base factor vanishes where the reduction divides by it."""


class SignMismatch(RicciHessianError):
    """Closed-form family requested with an incompatible constant sign."""


class RadicandNegative(RicciHessianError):
    """ODE state is outside the region where its square root is real."""


class StepUnderflow(RicciHessianError):
    """Integrator step size collapsed."""


class MonotonicityViolated(RicciHessianError):
    """Profile is not positive and increasing where required."""


class ZeroCrossing(RicciHessianError):
    """Profile vanishes on its grid."""


class ZeroSymmetricPart(RicciHessianError):
    """Symmetric part of an extension derivation vanishes."""


class DomainExhausted(RicciHessianError):
    """Sampling could not find enough admissible points."""


class ReportIoError(RicciHessianError):
    """Report could not be written or read."""
