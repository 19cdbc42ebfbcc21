"""Exception types raised by smmdesign."""


class DimensionError(ValueError):
    """Array dimensions are incompatible with the requested construction."""


class SingularDesign(ArithmeticError):
    """The input signal matrix (or the KKT matrix built from it) is singular."""

    def __init__(self, message, rank=None, cond=None):
        super().__init__(message)
        self.rank = rank
        self.cond = cond


class InfeasiblePoint(SingularDesign):
    """The design objective is undefined at the requested input."""


class DesignFailed(RuntimeError):
    """Every start of the input optimizer failed."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or []


class DegenerateCombiner(ValueError):
    """A zero combiner vector g makes the output covariance singular."""


class DegenerateReference(ValueError):
    """The reference impulse response is constant, so the fit is undefined."""


class SingularRegressor(ArithmeticError):
    """The least-squares Toeplitz regressor is rank deficient."""
