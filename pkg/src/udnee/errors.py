"""Exception hierarchy shared by the whole package.

Exit-code convention for the CLI (and mirrored by the HTTP service):
0 success, 2 configuration error, 3 numeric/domain error, 4 non-convergence.
"""


class UdneeError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigError(UdneeError):
    """Invalid or inconsistent scenario configuration."""

    exit_code = 2

    def __init__(self, message, field=None):
        self.field = field
        if field:
            message = f"{field}: {message}"
        super().__init__(message)


class NumericDomainError(UdneeError):
    """An operation was called outside its mathematical domain."""

    exit_code = 3


class DegenerateDeploymentError(NumericDomainError):
    """A sampled deployment cannot support the requested simulation."""


class ProtocolError(UdneeError):
    """The association protocol was driven into an invalid state."""

    exit_code = 3


class ConvergenceError(UdneeError):
    """An iterative scheme exceeded its iteration budget."""

    exit_code = 4

    def __init__(self, message, last_iterate=None, iterations=None):
        self.last_iterate = last_iterate
        self.iterations = iterations
        super().__init__(message)
