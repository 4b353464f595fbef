"""Exception types raised across the package."""


class ConvexBenchError(Exception):
    """Base class for all errors raised by convexbench."""


class PointNotInterior(ConvexBenchError):
    pass


class UnboundedResult(ConvexBenchError):
    pass


class DimensionMismatch(ConvexBenchError):
    pass


class SingularMap(ConvexBenchError):
    pass


class DegenerateBody(ConvexBenchError):
    pass


class TooHighDimensional(ConvexBenchError):
    pass


class ZeroAtOrigin(ConvexBenchError):
    pass


class NonPositiveP(ConvexBenchError):
    pass


class RangeRatioExceeded(ConvexBenchError):
    pass


class NonPolytope(ConvexBenchError):
    pass


class NonSymmetricGauge(ConvexBenchError):
    pass


class InclusionViolated(ConvexBenchError):
    pass


class DegenerateSample(ConvexBenchError):
    pass


class NoConvergence(ConvexBenchError):
    """Iteration did not reach its tolerance; keeps the best iterate."""

    def __init__(self, message, best=None, residual=None):
        super().__init__(message)
        self.best = best
        self.residual = residual


class BudgetExhaustedWithoutCertificate(ConvexBenchError):
    """The search ran out of evaluations before meeting its target."""

    def __init__(self, message, best_xi=None, best_value=None, target=None):
        super().__init__(message)
        self.best_xi = best_xi
        self.best_value = best_value
        self.target = target
