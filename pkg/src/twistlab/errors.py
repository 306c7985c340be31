"""Shared exception types."""


class DomainError(ValueError):
    """Argument outside the domain a routine certifies."""


class PoleProximityError(DomainError):
    """Evaluation point too close to a pole for the requested accuracy."""


class StripConditionError(DomainError):
    """Contour or strip precondition violated (e.g. 0 < c < Re xi)."""


class ConvergenceError(RuntimeError):
    """Iteration budget exhausted before the tolerance was met."""


class CancellationError(RuntimeError):
    """A certified-exact fast path detected it cannot certify the result."""
