"""Exception types shared across the package."""


class SelfGoalError(Exception):
    """Base class for all package errors."""


class InvalidArgument(SelfGoalError, ValueError):
    pass


class NotFound(SelfGoalError, KeyError):
    def __str__(self) -> str:  # KeyError quotes its message otherwise
        return str(self.args[0]) if self.args else ""


class ParseError(SelfGoalError, ValueError):
    """Malformed document. Carries the 1-based line (and column when known)."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None, path=None):
        self.line = line
        self.column = column
        self.path = path
        where = []
        if path is not None:
            where.append(str(path))
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        super().__init__(f"{': '.join([', '.join(where), message]) if where else message}")


class BackendError(SelfGoalError):
    pass


class BackendUnavailable(BackendError):
    """Transport failure that survived every retry."""


class RemoteRejected(BackendError):
    def __init__(self, status: int, body: str):
        self.status = status
        self.body = body
        super().__init__(f"remote rejected request with HTTP {status}: {body[:500]}")


class ScriptExhausted(BackendError):
    """A scripted backend was asked for a reply it does not have."""


class ReplyFormatError(SelfGoalError, ValueError):
    """A model reply did not contain the expected structured object."""


class ConfigError(SelfGoalError, ValueError):
    pass


class ExperimentAborted(SelfGoalError):
    """A run stopped early; ``record`` holds the partial, already-flushed record."""

    def __init__(self, message: str, record=None):
        super().__init__(message)
        self.record = record
