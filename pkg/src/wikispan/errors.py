"""Exception hierarchy shared by all stages.

The CLI maps these onto its exit-code contract: ConfigError -> 1,
DataError -> 2, anything else -> 3.
"""


class WikispanError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(WikispanError):
    """Invalid configuration or command usage."""


class DataError(WikispanError):
    """Malformed or inconsistent input data."""


class ParseError(DataError):
    """Syntax error in a text input, with position information."""

    def __init__(self, message, *, char_pos=None, byte_pos=None, line=None, column=None):
        parts = [message]
        if line is not None:
            parts.append(f"line {line}")
        if column is not None:
            parts.append(f"column {column}")
        if char_pos is not None:
            parts.append(f"char {char_pos}")
        if byte_pos is not None:
            parts.append(f"byte {byte_pos}")
        super().__init__(": ".join([parts[0], ", ".join(parts[1:])]) if len(parts) > 1 else message)
        self.char_pos = char_pos
        self.byte_pos = byte_pos
        self.line = line
        self.column = column


class ValidationError(DataError):
    """A record violates a declared invariant; names the offending field."""

    def __init__(self, message, *, field=None, record_id=None, line=None):
        ctx = []
        if record_id is not None:
            ctx.append(f"record {record_id!r}")
        if line is not None:
            ctx.append(f"line {line}")
        if field is not None:
            ctx.append(f"field {field!r}")
        super().__init__(f"{message} ({', '.join(ctx)})" if ctx else message)
        self.field = field
        self.record_id = record_id
        self.line = line
