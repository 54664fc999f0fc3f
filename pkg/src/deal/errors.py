"""Exception types raised across the package."""

from __future__ import annotations


class ResourceLimitError(ValueError):
    """Requested computation exceeds a hard size limit (e.g. brute force above 24 bits)."""


class CapacityError(ValueError):
    """A logical register does not fit on the target device."""


class UndefinedMetricError(ValueError):
    """A metric is undefined for the given inputs (e.g. zero reference energy)."""


class NumericalError(ArithmeticError):
    """A linear-algebra step failed; ``diagnostic`` carries the offending quantities."""

    def __init__(self, message: str, diagnostic: dict | None = None):
        super().__init__(message)
        self.diagnostic = diagnostic or {}
