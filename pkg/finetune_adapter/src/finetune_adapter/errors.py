"""Adapter exception hierarchy."""

from __future__ import annotations


class AdapterError(Exception):
    """Base class for adapter errors."""


class RegistrationError(AdapterError):
    """A rendered token string collides with the tokenizer's existing vocabulary."""


class CorruptRecordError(AdapterError):
    """A trail record lacks its zero token where the mask anchor points."""


class RecordError(AdapterError):
    """A JSONL record is missing required fields; carries the line number."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
