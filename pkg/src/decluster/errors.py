"""Exception types shared across the package."""


class DeclusterError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(DeclusterError, ValueError):
    """A parameter is invalid or a combination of parameters is unsupported."""


class NetConstructionError(DeclusterError):
    """A constructed point set failed its own balance check.

    Carries the first offending interval so the failure is reproducible.
    """

    def __init__(self, message, interval=None, found=None, expected=None):
        super().__init__(message)
        self.interval = interval
        self.found = found
        self.expected = expected


class InvalidNetError(DeclusterError):
    """A point set handed in as input does not have the promised structure."""


class BudgetExceededError(DeclusterError):
    """A requested computation would exceed the configured memory budget."""


class SchemeFormatError(DeclusterError):
    """A serialized scheme or net file is malformed or violates an invariant."""
