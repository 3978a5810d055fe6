"""Exception hierarchy shared across the package.

``SpmfError`` marks data-level failures that the CLI maps to exit code 1;
plain ``ValueError``/``TypeError`` remain programming errors.
"""


class SpmfError(Exception):
    """Base class for data and configuration errors."""


class FormatError(SpmfError):
    """A source file does not follow its declared layout."""

    def __init__(self, message, path=None, line=None, offset=None):
        self.path = path
        self.line = line
        self.offset = offset
        where = []
        if path is not None:
            where.append(str(path))
        if line is not None:
            where.append(f"line {line}")
        if offset is not None:
            where.append(f"byte offset {offset}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class StatsError(SpmfError):
    """Distance statistics are missing, empty, or degenerate."""


class ManifestError(SpmfError):
    """A dataset manifest violates its schema or protocol parameters."""


class TrainingError(SpmfError):
    """Training aborted, e.g. on non-finite gradients."""


class DataError(SpmfError):
    """A corpus sample is inconsistent with the model or split."""


class DegeneratePairError(ValueError):
    """Raised when an orientation is requested for coincident joints."""
