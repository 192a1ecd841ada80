"""Exception hierarchy shared across the package."""


class LdepError(Exception):
    """Base class for all package errors."""


class InvalidArgument(LdepError, ValueError):
    """Shapes, ranges or option values that violate an operation's contract."""


class InvalidData(LdepError, ValueError):
    """Input data that cannot be used (bad CSV, all-missing column, ...)."""


class SolverError(LdepError, RuntimeError):
    """Raised by the LP solver or the training loop."""


class IterationLimit(SolverError):
    """The simplex method hit its pivot cap.

    ``best`` holds the last primal iterate in original coordinates (or None
    if phase I never produced one).
    """

    def __init__(self, message, best=None, iterations=0):
        super().__init__(message)
        self.best = best
        self.iterations = iterations
