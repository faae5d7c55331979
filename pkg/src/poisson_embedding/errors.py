class DomainError(ValueError):
    """An argument lies outside the domain an operation is defined on."""


class CoverageError(ValueError):
    """A path was queried outside the time interval it covers."""


class ZeroIncrementError(DomainError):
    """A walk increment is exactly zero, so its direction is undefined."""
