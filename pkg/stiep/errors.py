"""This module contains the exception hierarchy shared by the solver components and the command-line harness."""


class StiepError(Exception):
    """Base class of every error raised by the package."""

    exit_code = 1


# ============================================================================
# INPUT ERRORS (exit code 2)
# ============================================================================


class InputError(StiepError, ValueError):
    """Malformed arguments, files or spectra."""

    exit_code = 2


class DimensionMismatch(InputError):
    pass


class EvenDimension(InputError):
    pass


class LengthMismatch(InputError):
    pass


class BadArguments(InputError):
    pass


class InvalidSpectrum(InputError):
    pass


class NonFiniteEntries(InputError):
    pass


class InvalidConfig(InputError):
    pass


# ============================================================================
# NUMERICAL ERRORS (exit code 3)
# ============================================================================


class NumericalError(StiepError, ArithmeticError):
    """A numerical kernel or solver step could not produce a valid result."""

    exit_code = 3


class SingularInput(NumericalError):
    pass


class NoConvergence(NumericalError):
    pass


class NotSkew(NumericalError):
    pass


class DegenerateStep(NumericalError):
    pass


class ZeroDirection(NumericalError):
    pass


class NotDescent(NumericalError):
    pass


class DiagnosticFailure(NumericalError):
    """Raised in debug mode when a per-iteration identity of the solver is violated."""

    pass
