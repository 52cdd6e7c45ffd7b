"""Exception hierarchy shared by every module of the package."""


class EspDesignError(Exception):
    """Base class for all errors raised by esp_design."""


class InputError(EspDesignError, ValueError):
    """Malformed arguments: wrong shapes, out-of-range orders, non-finite data."""


class DomainError(EspDesignError, ValueError):
    """A matrix argument is outside the positive definite cone."""


class InfeasibleDesignError(EspDesignError):
    """The information matrix of a design is not positive definite."""


class InfeasibleProblemError(EspDesignError):
    """No feasible design could be found for the requested problem."""


class NumericFailure(EspDesignError):
    """An iterative procedure failed to converge.

    ``residual`` carries the last residual seen, when one is available.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class CannotRoundError(EspDesignError):
    """Fewer than ``k`` candidate experiments carry positive weight."""


class StuckInfeasibleError(EspDesignError):
    """Greedy removal reached a set where every removal is infeasible."""

    def __init__(self, message, partial):
        super().__init__(message)
        self.partial = partial


class BudgetExceededError(EspDesignError):
    """An exhaustive oracle was asked to enumerate more than its budget."""


class CsvFormatError(EspDesignError, ValueError):
    """A CSV file could not be parsed. ``row``/``column`` locate the problem."""

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column
