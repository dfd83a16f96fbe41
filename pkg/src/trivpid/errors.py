"""Exception hierarchy shared by all trivpid modules."""


class TrivPIDError(Exception):
    """Base class for every error raised by trivpid."""


class ValidationError(TrivPIDError, ValueError):
    """Input data violates a documented precondition."""


class ConsistencyError(TrivPIDError, ArithmeticError):
    """An internal identity failed beyond floating-point noise."""


class SolverError(TrivPIDError, RuntimeError):
    """The polytope optimisation did not converge.

    Carries the best objective reached (bits) and the remaining gap estimate
    so callers can decide whether the partial result is usable.
    """

    def __init__(self, message, *, target=None, best_objective=None, gap=None):
        super().__init__(message)
        self.target = target
        self.best_objective = best_objective
        self.gap = gap


class DegenerateError(ValidationError):
    """Gaussian covariance is singular or implies infinite information."""
