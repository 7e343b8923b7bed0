"""Shared exception types."""


class ParseError(ValueError):
    """Malformed input file; carries the offending line number when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class GuardError(RuntimeError):
    """An exact/brute-force routine was asked to exceed its size guard."""


class DecodeError(ValueError):
    """A forest witness failed one of the decoding conditions."""
