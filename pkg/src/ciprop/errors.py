"""Exception hierarchy shared across the package."""


class CipropError(Exception):
    """Base class for all package-specific errors."""


class DataError(CipropError):
    """Invalid input data: parse failures, malformed containers, bad masks."""


class NumericalError(CipropError):
    """Numerical failure: factorization breakdown, violated solve invariants."""


class UsageError(CipropError):
    """Invalid command-line or configuration usage."""
