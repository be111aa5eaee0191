class WittDispError(Exception):
    """Base class for library errors."""


class ArgumentError(WittDispError, ValueError):
    """Malformed or mismatched arguments."""


class DomainError(WittDispError, ArithmeticError):
    """Operation undefined for the given value (non-unit, outside an ideal)."""


class ValidationError(WittDispError, ValueError):
    """Structured object fails its defining conditions."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ResourceError(WittDispError, RuntimeError):
    """Enumeration or computation exceeds a configured cap."""
