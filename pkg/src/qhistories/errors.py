"""Exception hierarchy shared by every module."""

from __future__ import annotations


class QHistoriesError(Exception):
    """Base class for all errors raised by the package."""


class DimensionMismatchError(QHistoriesError, ValueError):
    pass


class ValidationError(QHistoriesError, ValueError):
    """An input failed a numerical validator.

    ``residual`` carries the offending norm when one is meaningful.
    """

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class ContextError(ValidationError):
    """A list of atoms is not a projective decomposition."""

    def __init__(self, message: str, indices: tuple[int, ...] = (), residual: float | None = None):
        super().__init__(message, residual)
        self.indices = indices


class ScenarioError(ValidationError):
    """Scenario document rejected; ``path`` is a JSON pointer into the document."""

    def __init__(self, message: str, path: str = "", residual: float | None = None):
        super().__init__(f"{path or '/'}: {message}", residual)
        self.path = path or "/"


class UnregisteredTimePairError(QHistoriesError, ValueError):
    pass


class NonCommutingError(QHistoriesError):
    """Conditional probability undefined: the projectors do not commute."""

    def __init__(self, message: str, norm: float):
        super().__init__(message)
        self.norm = norm


class ZeroConditioningError(QHistoriesError):
    def __init__(self, message: str, weight: float):
        super().__init__(message)
        self.weight = weight


class InconsistentFamilyError(QHistoriesError):
    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class NumericalError(QHistoriesError, ArithmeticError):
    """Internal numerical failure (a self-check that should never trip)."""
