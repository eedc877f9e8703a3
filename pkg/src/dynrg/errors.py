"""Exception types shared across the package."""


class DynrgError(Exception):
    """Base class for data and model errors (CLI exit code 2)."""


class SnapshotError(DynrgError, ValueError):
    """Invalid snapshot data or a malformed snapshot file.

    ``line`` is the 1-based line number when the error comes from a file.
    """

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnidentifiableError(DynrgError):
    """The data carry no information about the requested parameter."""


class ConvergenceError(DynrgError):
    """A fixed-point iteration did not converge; ``last`` holds the last iterate."""

    def __init__(self, message, last=None):
        super().__init__(message)
        self.last = last
