"""Exception hierarchy.

Two families matter to callers: ``ValidationError`` subclasses signal bad
input (CLI exit code 1) and ``NumericalError`` subclasses signal a failed
or untrustworthy computation (CLI exit code 2).
"""


class NHGWPError(Exception):
    """Base class for all package errors."""


class ValidationError(NHGWPError, ValueError):
    """Invalid input: wrong dimensions, bad parameters, unknown keys."""

    def __init__(self, message, key=None):
        self.key = key
        if key is not None:
            message = f"{key}: {message}"
        super().__init__(message)


class ParseError(ValidationError):
    """Malformed scenario text."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class PreconditionViolation(ValidationError):
    """An operation was called outside the regime it is defined for."""


class NumericalError(NHGWPError, ArithmeticError):
    """A computation failed or produced untrustworthy output."""


class NonNormalizable(NumericalError):
    """Im(alpha) is not positive definite."""


class SingularTransform(NumericalError):
    """The guiding-trajectory transformation has a singular denominator."""


class ExponentOverflow(NumericalError):
    """The real part of a Gaussian exponent exceeds the configured cap."""


class SpectralInstability(NumericalError):
    """High-wavenumber amplification of the spectral scheme is too large."""


class BoundaryContamination(NumericalError):
    """The grid wavefunction has reached the box walls."""


class ZeroNorm(NumericalError):
    """The sampled density integrates to zero."""
