"""Exception types raised by the numerical routines."""


class FracPoissonError(Exception):
    """Base class for all library errors."""


class DomainError(FracPoissonError, ValueError):
    """An argument lies outside the domain of the operation."""


class BracketError(FracPoissonError, RuntimeError):
    """A root or extremum could not be bracketed."""


class AccuracyError(FracPoissonError, RuntimeError):
    """A quadrature, series or inversion did not reach its tolerance.

    The achieved error estimate is kept on ``estimate``.
    """

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class InversionError(AccuracyError):
    """Numerical Laplace inversion produced an inadmissible value."""


class UnsupportedOperation(FracPoissonError, NotImplementedError):
    """The operation is not available for this kind of object."""


class NotSpecialError(FracPoissonError, ValueError):
    """A Bernstein function failed the numerical specialness check."""
