"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: domain and resource errors exit with 2,
numerical failures exit with 3.
"""


class LahwalkError(Exception):
    """Base class for package errors."""


class DomainError(LahwalkError, ValueError):
    """An argument violates a documented precondition."""


class ResourceError(LahwalkError, RuntimeError):
    """A request exceeds a documented size cap (memo table, brute force)."""


class NumericalError(LahwalkError, ArithmeticError):
    """An iterative solver failed to bracket or converge.

    ``partial`` carries whatever intermediate result is available, for
    example the current root estimates of a polynomial solver.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class DegenerateError(LahwalkError, ArithmeticError):
    """Geometric input is degenerate (ties, coplanar points, tiny LP margin)."""
