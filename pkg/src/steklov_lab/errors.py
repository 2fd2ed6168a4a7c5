"""Exception hierarchy shared by all modules.

The CLI maps ``ValidationError`` subclasses to exit code 2 and
``NumericalError`` subclasses to exit code 1.
"""


class SteklovLabError(Exception):
    """Base class for every error raised by the package."""


class ValidationError(SteklovLabError, ValueError):
    """Bad input: violated precondition, unknown label, malformed file."""


class InvalidArgument(ValidationError):
    pass


class InvalidMesh(ValidationError):
    pass


class GlueMismatch(ValidationError):
    """Arc discretization does not match the rectangle's glued sides."""


class InfeasibleWindow(ValidationError):
    pass


class NumericalError(SteklovLabError, ArithmeticError):
    """A numerical kernel failed on otherwise valid input."""


class NotSPD(NumericalError):
    pass


class NoCrossing(NumericalError):
    pass
