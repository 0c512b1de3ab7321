"""Exception types shared across the toolkit."""


class AgendaMinerError(Exception):
    """Base class for all toolkit errors."""


class IngestError(AgendaMinerError):
    """Raised when a document cannot be ingested (empty text, bad manifest row)."""


class ConflictError(AgendaMinerError):
    """Raised when a doc_id collides with one already in the corpus."""


class ConfigError(AgendaMinerError):
    """Raised for malformed configuration: bad regex rules, shape mismatches."""


class ValidationError(AgendaMinerError):
    """Raised when an operation's preconditions are violated."""


class ParseError(AgendaMinerError):
    """Raised for malformed on-disk artifacts; carries the offending line."""

    def __init__(self, message: str, line_number: int | None = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
