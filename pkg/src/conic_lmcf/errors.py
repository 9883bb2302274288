"""Exception hierarchy shared across the toolkit.

Two failure families matter to callers (and to the CLI exit-code mapping):
``ValidationError`` for inputs that violate a documented precondition, and
``NumericalError`` for computations that start from valid inputs but fail
numerically.
"""


class ValidationError(ValueError):
    """An input violates a documented precondition."""


class WindowError(ValidationError):
    """An exponent table does not cover the requested weight window."""


class ExceptionalWeightError(ValidationError):
    """A weight sits (within tolerance) on an exceptional exponent."""

    def __init__(self, message, offending=None):
        super().__init__(message)
        self.offending = tuple(offending) if offending is not None else ()


class MixedHomogeneityError(ValidationError):
    """A restricted moment function mixes incompatible homogeneity orders."""


class MissingDerivativeError(ValidationError):
    """A weighted norm was requested with too few derivative samples."""


class DegenerateDataError(ValidationError):
    """Rate fitting received degenerate (zero or too little) data."""


class NumericalError(RuntimeError):
    """A numerical computation failed (singular solve, NaN blow-up, ...)."""


class GraphConditionError(NumericalError):
    """The gradient graph left the locally-embedded regime.

    Carries the offending node indices and, when raised mid-step, a
    suggested smaller time step.
    """

    def __init__(self, message, nodes=None, suggested_dt=None):
        super().__init__(message)
        self.nodes = nodes if nodes is not None else []
        self.suggested_dt = suggested_dt
