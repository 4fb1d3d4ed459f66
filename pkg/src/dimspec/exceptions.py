"""Exception hierarchy for dimspec."""

from typing import Any, Optional


class DimspecError(Exception):
    """Base class for all dimspec errors."""


class InputError(DimspecError, ValueError):
    """Raised when an argument is malformed or out of range."""


class PreconditionError(DimspecError):
    """Raised when an operation's precondition does not hold."""


class ResourceError(DimspecError):
    """
    Raised when a word or state budget would be exceeded.

    Args:
        message: Human readable description
        estimate: Size estimate that broke the budget
        budget: The budget that was exceeded
    """

    def __init__(
        self,
        message: str,
        estimate: Optional[int] = None,
        budget: Optional[int] = None
    ):
        super().__init__(message)
        self.estimate = estimate
        self.budget = budget


class ConfigurationError(DimspecError):
    """Raised when a system configuration cannot be used."""


class SpectrumRangeError(DimspecError, ValueError):
    """
    Raised when an inversion target lies above the attainable dimension.

    Args:
        message: Human readable description
        enclosure: The computed enclosure of the full-shift dimension
    """

    def __init__(self, message: str, enclosure: Any = None):
        super().__init__(message)
        self.enclosure = enclosure


class InternalError(DimspecError):
    """Raised when an internal invariant is violated."""
