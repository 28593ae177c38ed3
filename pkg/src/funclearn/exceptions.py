"""Exception types raised by funclearn."""


class FuncLearnError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(FuncLearnError, ValueError):
    pass


class DivergenceError(FuncLearnError, ArithmeticError):
    """Raised when an iterate blows up past the divergence guard.

    Attributes
    ----------
    iteration : int
        Iteration at which the guard tripped.
    machine : int or None
        Index of the local machine, for distributed fits.
    """

    def __init__(self, message, iteration, machine=None):
        super().__init__(message)
        self.iteration = iteration
        self.machine = machine


class DegenerateDataError(FuncLearnError, ValueError):
    pass


class NumericalError(FuncLearnError, ArithmeticError):
    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class ConfigError(FuncLearnError, ValueError):
    pass
