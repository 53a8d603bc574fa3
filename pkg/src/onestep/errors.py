"""Exception hierarchy shared by every module of the package."""


class OneStepError(Exception):
    """Base class for all errors raised by :mod:`onestep`."""


class InvalidParameterError(OneStepError, ValueError):
    """A parameter is outside its admissible range."""


class ModelViolationError(OneStepError):
    """Rate functions produced a value that breaks the model's sign conditions."""


class AssumptionViolationError(OneStepError):
    """The coefficient functions do not satisfy the standing assumptions
    (unique stable interior root of A - C, positive A + C)."""


class ReducibleChainError(OneStepError):
    """A zero interior rate splits the state space."""

    def __init__(self, message, index):
        super().__init__(message)
        self.index = index


class NumericalError(OneStepError):
    """Quadrature or time stepping failed to reach the requested accuracy."""


class StabilityError(NumericalError):
    """Time step exceeds the explicit integrator's stability guard."""
