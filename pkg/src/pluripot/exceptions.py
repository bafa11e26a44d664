"""Exception hierarchy shared by all pluripot modules."""


class PluripotError(Exception):
    """Base class for every error raised by pluripot."""


class InvalidBox(PluripotError, ValueError):
    pass


class NodeBudgetExceeded(PluripotError, ValueError):
    pass


class DomainNotCovered(PluripotError, ValueError):
    pass


class OutOfBox(PluripotError, ValueError):
    pass


class IsolatedNode(PluripotError, RuntimeError):
    pass


class BadParams(PluripotError, ValueError):
    pass


class DimensionMismatch(PluripotError, ValueError):
    pass


class EmptyIntersection(PluripotError, ValueError):
    pass


class MaskMismatch(PluripotError, ValueError):
    pass


class PreconditionError(PluripotError, ValueError):
    pass


class NonConvergence(PluripotError, RuntimeError):
    """Iterative solver stopped before reaching its tolerance.

    ``result`` carries the best iterate so callers can still inspect it.
    """

    def __init__(self, message, result=None, residual=None):
        super().__init__(message)
        self.result = result
        self.residual = residual


class LpInfeasible(PluripotError, RuntimeError):
    pass


class LpUnbounded(PluripotError, RuntimeError):
    pass


class InvalidProbe(PluripotError, ValueError):
    pass


class EmptyE(PluripotError, ValueError):
    pass


class UnboundedU(PluripotError, ValueError):
    pass


class BoundViolated(PluripotError, ValueError):
    pass


class NoFeasibleC(PluripotError, RuntimeError):
    def __init__(self, message, best_violation=None):
        super().__init__(message)
        self.best_violation = best_violation


class ConfigError(PluripotError, ValueError):
    pass
