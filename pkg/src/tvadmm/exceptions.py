"""Exception types used across the solver library."""


class NotPositiveDefiniteError(ValueError):
    """A Cholesky factorization hit a non-positive pivot.

    Attributes
    ----------
    pivot_index : int
        Zero-based index of the offending pivot.
    pivot_value : float
        Value of the pivot that failed the positivity test.
    """

    def __init__(self, pivot_index, pivot_value):
        self.pivot_index = int(pivot_index)
        self.pivot_value = float(pivot_value)
        super().__init__(
            "matrix is not positive definite: pivot %d is %.6g"
            % (self.pivot_index, self.pivot_value)
        )


class NumericalFailureError(RuntimeError):
    """An iterative routine failed to reach its accuracy target.

    Carries optional context: the residual that was achieved, and for
    solver failures the iteration and block index where the problem
    surfaced.
    """

    def __init__(self, message, *, residual=None, iteration=None, block_index=None):
        self.residual = residual
        self.iteration = iteration
        self.block_index = block_index
        super().__init__(message)


class UnboundedProblemError(RuntimeError):
    """The optimization problem was detected to be unbounded below."""
