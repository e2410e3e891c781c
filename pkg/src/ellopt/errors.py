"""Exception types shared across the package.

Precondition violations (bad grids, parity, unknown names) derive from
PreconditionError; solver breakdowns derive from SolverError. The CLI maps
these to exit codes 2 and 3 respectively.
"""


class PreconditionError(ValueError):
    """A documented precondition of an operation was violated."""


class GridMismatchError(PreconditionError):
    """Operands live on different grids or have incompatible shapes."""


class SimpsonParityError(PreconditionError):
    """Composite Simpson weights require an even number of subintervals."""


class FieldEvaluationError(PreconditionError):
    """A scalar field produced a non-finite value at a grid node."""


class NoExactSolutionError(PreconditionError):
    """The problem has no closed-form optimal solution to compare against."""


class UnsupportedReductionError(PreconditionError):
    """The scheme has no two-field (adjoint-eliminated) form."""


class UnsupportedMethodError(PreconditionError):
    """The requested solve method does not apply to this system."""


class SolverError(RuntimeError):
    """Linear solve failed to meet the residual contract."""

    def __init__(self, message, stats=None):
        super().__init__(message)
        self.stats = stats
