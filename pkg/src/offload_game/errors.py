"""Exception hierarchy shared by every module of the package."""


class OffloadGameError(Exception):
    """Base class for all package errors."""


class ValidationError(OffloadGameError, ValueError):
    """Raised when a configuration, profile or distribution violates its invariants."""


class UnsupportedDimensionError(OffloadGameError, ValueError):
    """Raised when an operation is only defined for a specific number of players."""


class RegimeError(OffloadGameError):
    """Raised when the linear (weak interference) regime is required but does not hold."""


class SingularSystemError(OffloadGameError, ArithmeticError):
    """Raised when a linear system that should be regular turns out singular."""


class OracleBudgetError(OffloadGameError, MemoryError):
    """Raised when a brute-force grid would exceed the configured cell budget."""


class InsufficientHistoryError(OffloadGameError, ValueError):
    """Raised when too few states are available for cycle detection."""


class ComparisonError(OffloadGameError, ValueError):
    """Raised when two experiment results cannot be compared."""
