"""Exception types shared across the package."""


class InvalidArgumentError(ValueError):
    """A precondition on an argument was violated."""


class GridMismatchError(InvalidArgumentError):
    """Two objects live on different grids."""


class SolverFailureError(RuntimeError):
    """An iterative method failed to reach its tolerance.

    ``history`` holds whatever diagnostic sequence the solver tracked
    (residuals, path levels, ...), ``best`` the best iterate if any.
    """

    def __init__(self, message, history=None, best=None):
        super().__init__(message)
        self.history = list(history) if history is not None else []
        self.best = best


class NodalOverflowError(OverflowError):
    """Evaluating a nonlinearity at a nodal value left the representable range."""

    def __init__(self, message, node=None, value=None):
        super().__init__(message)
        self.node = node
        self.value = value
