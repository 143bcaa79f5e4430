"""Exception types shared across the package."""

from __future__ import annotations


class SparseFourierError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(SparseFourierError, ValueError):
    """An argument lies outside the domain of the operation (e.g. non-finite x)."""


class DimensionError(SparseFourierError, ValueError):
    """Lengths or dimensions of arguments do not agree."""


class CapacityError(SparseFourierError, ValueError):
    """A request exceeds a declared capacity limit (degree, node budget, ...)."""


class EmptyGridError(SparseFourierError, ValueError):
    """A node grid with zero points was requested."""


class UnsupportedShapeError(SparseFourierError, ValueError):
    """Image or array shape not supported (e.g. non-square images)."""


class DegenerateColumnError(SparseFourierError, ValueError):
    """A collocation column is identically zero on the node grid."""


class NumericalBreakdown(SparseFourierError, ArithmeticError):
    """Non-finite values appeared during an iterative solve."""

    def __init__(self, message: str, iteration: int):
        super().__init__(f"{message} (iteration {iteration})")
        self.iteration = iteration


class InfeasibleError(SparseFourierError, RuntimeError):
    """A linear program was detected to be infeasible or did not converge."""


class BasisMismatchError(SparseFourierError, ValueError):
    """An operation received a result computed in the wrong basis family."""


class MissingIndexError(SparseFourierError, KeyError):
    """A required multi-index is absent from an index set."""
