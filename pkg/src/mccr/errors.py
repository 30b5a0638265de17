"""Exception hierarchy.

The command-line front end maps these onto exit codes: usage errors exit
with 1, numerical failures with 2 and I/O failures with 3.
"""


class MccrError(Exception):
    """Base class for every error raised by the package."""


class UsageError(MccrError, ValueError):
    """Invalid arguments, shapes or configuration."""


class DomainError(MccrError, ValueError):
    """An input lies outside the mathematical domain of an operation."""


class NumericalError(MccrError, ArithmeticError):
    """A linear solve or factorization failed.

    ``sigma`` carries the scale parameter of the annealing stage that failed,
    when there is one.
    """

    def __init__(self, message, sigma=None):
        super().__init__(message)
        self.sigma = sigma


class UndefinedLocationError(MccrError, LookupError):
    """A location function (mean, mode, median) does not exist for a noise law."""
