"""Exception hierarchy.

The CLI maps :class:`UsageError` to exit code 1 and every other
:class:`FilterError` to exit code 2.
"""


class FilterError(Exception):
    """Base class for all errors raised by this package."""


class UsageError(FilterError, ValueError):
    """Caller passed arguments of the wrong shape or out of range."""


class ConfigurationError(FilterError, ValueError):
    """A parameter set or signal description is internally inconsistent."""


class UnsupportedConfigurationError(ConfigurationError):
    """Valid input that a routine deliberately does not handle."""


class DegenerateGraphError(FilterError):
    """A row sum of the weight matrix is (numerically) zero."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class NumericalError(FilterError, ArithmeticError):
    """Non-finite values or solver failure during a computation."""
