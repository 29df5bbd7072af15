"""Exception hierarchy shared by all modules.

Each class carries the CLI exit code it maps to, so the command-line layer
can translate failures without inspecting messages.
"""


class BogospecError(Exception):
    """Base class for library errors."""

    exit_code = 1


class UsageError(BogospecError):
    """Bad configuration or command-line usage."""

    exit_code = 2


class ValidationError(BogospecError, ValueError):
    """An input violates a documented precondition or invariant."""

    exit_code = 3


class NumericalError(BogospecError, RuntimeError):
    """A numerical procedure failed or produced an untrustworthy result."""

    exit_code = 4


class ConvergenceError(NumericalError):
    """An iterative method stopped before meeting its tolerance."""

    def __init__(self, message, last_residual=None):
        super().__init__(message)
        self.last_residual = last_residual


class ResourceError(NumericalError):
    """A requested problem size exceeds the configured memory budget."""
