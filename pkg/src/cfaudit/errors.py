"""Exception types shared across the package."""


class AuditError(Exception):
    """Base class for all package errors."""


class SchemaError(AuditError):
    """Dataset or attribute schema is malformed or inconsistent with the data."""


class UsageError(AuditError):
    """An operation was called with arguments violating its preconditions."""


class CapacityError(AuditError):
    """An exact solver was asked to handle an instance above its size cap."""


class InfeasibleError(AuditError):
    """The requested coverage cannot be achieved under the given constraints."""

    def __init__(self, message: str, uncovered: list[int] | None = None):
        super().__init__(message)
        self.uncovered = uncovered or []
