"""Exception hierarchy shared across the pipeline.

ConfigError maps to CLI exit code 2, the data-facing errors to exit code 3.
"""


class SurvpipeError(Exception):
    """Base class for all survpipe errors."""


class SchemaError(SurvpipeError):
    """Malformed schema file or schema invariant violation."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + loc)
        self.line = line
        self.column = column


class ParseError(SurvpipeError):
    """Undecodable data record (bad byte, short line, arity mismatch, ...)."""


class ValidationError(SurvpipeError):
    """Operation precondition or domain invariant violated."""


class ConfigError(SurvpipeError):
    """Bad experiment or model configuration."""


class ModelIOError(SurvpipeError):
    """Corrupt, truncated, or incompatible model container."""
