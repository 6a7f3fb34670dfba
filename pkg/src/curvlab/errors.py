"""Exception hierarchy shared by every module."""


class CurvlabError(Exception):
    """Base class for all errors raised by curvlab."""


class DomainError(CurvlabError, ValueError):
    """An argument lies outside the domain of an operation."""


class PreconditionError(CurvlabError):
    """A mathematical hypothesis of an operation does not hold.

    ``value`` carries the offending quantity when one exists and
    ``location`` the node index (or condition name) where it failed.
    """

    def __init__(self, message, value=None, location=None):
        super().__init__(message)
        self.value = value
        self.location = location


class GeometryError(CurvlabError):
    """The input is not an admissible immersed/embedded hypersurface."""

    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class DataError(CurvlabError, ValueError):
    """Non-finite or malformed numerical input."""

    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class NumericError(CurvlabError, RuntimeError):
    """An iterative procedure failed to converge."""


class ConfigError(CurvlabError):
    """The run configuration cannot be parsed or resolved."""
