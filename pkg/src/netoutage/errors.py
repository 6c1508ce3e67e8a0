"""Exception types shared across the package."""


class ParameterError(ValueError):
    """A parameter is outside its admissible range."""


class UsageError(TypeError):
    """An operation was called on an input that lacks required structure."""


class EstimationError(RuntimeError):
    """A statistical estimate could not be formed (e.g. no valid samples)."""


class FitError(EstimationError):
    """A scaling fit is infeasible because the data are noise dominated."""


class NumericalError(ArithmeticError):
    """A quadrature or root search failed to converge."""


class NotSupportedError(NotImplementedError):
    """The requested model/MAC combination has no implementation."""


class CoincidentPointError(EstimationError):
    """A receiver coincides with a transmitter under singular path loss."""
