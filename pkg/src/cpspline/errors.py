"""Exception types raised by the numerical layers."""


class CpsplineError(Exception):
    """Base class for solver-side failures (as opposed to bad user input)."""


class NotPositiveDefiniteError(CpsplineError):
    """A matrix required to be symmetric positive definite is not."""


class SingularSystemError(CpsplineError):
    """The normal equations are singular for the given data and penalty."""


class InfeasibleConstraintsError(CpsplineError):
    """No point satisfying the constraint system could be produced."""


class IterationLimitError(CpsplineError):
    """The active-set iteration exceeded its hard iteration budget."""


class AllFitsFailedError(CpsplineError):
    """Every candidate on the regularization grid failed to solve."""


class TraceDegenerateError(CpsplineError):
    """The smoother trace leaves no residual degrees of freedom."""
