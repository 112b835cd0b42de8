"""
Error hierarchy for the bound engine.

Validation-style failures also subclass ValueError so callers that only
know about ValueError keep working.
"""


class ZZBoundError(Exception):
    """Base class for every error raised by zzbound."""


class DomainError(ZZBoundError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class ContractError(ZZBoundError, ValueError):
    """Caller violated an input precondition (ordering, sizes, ranges)."""


class ConvergenceError(ZZBoundError, ArithmeticError):
    """Adaptive routine ran out of budget before meeting its tolerance."""

    def __init__(self, message: str, partial_estimate: float):
        super().__init__(f"{message} (partial estimate {partial_estimate:.12g})")
        self.partial_estimate = partial_estimate


class UnsupportedOperationError(ZZBoundError, ValueError):
    """Operation is not defined for the given prior variant."""


class RegularityError(UnsupportedOperationError):
    """Density is not smooth enough for the requested functional."""


class ConfigError(ZZBoundError, ValueError):
    """Experiment or settings file failed validation."""
