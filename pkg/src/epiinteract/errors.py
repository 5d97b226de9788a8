"""Exception hierarchy shared across the package."""


class InteractionError(Exception):
    """Base class for all package errors."""


class ParseError(InteractionError):
    """Input file or inline counts could not be parsed."""


class EstimationError(InteractionError):
    """Estimates are undefined for the given data.

    ``cells`` lists the offending table cells (e.g. ``["d1"]``) when the
    failure is caused by empty cells.
    """

    def __init__(self, message, cells=()):
        super().__init__(message)
        self.cells = tuple(cells)


class SeparationError(EstimationError):
    """Complete or quasi-complete separation in a logistic fit."""


class ConvergenceError(InteractionError):
    """The iterative fit did not converge within its iteration cap."""
