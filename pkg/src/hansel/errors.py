"""Exception hierarchy shared across the package."""

from __future__ import annotations


class HanselError(Exception):
    """Base class for all package errors."""


class BoundaryError(HanselError):
    """An insertion index fell outside the valid unit boundaries."""


class TokenParseError(HanselError):
    """A token-like substring could not be parsed as a special token."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class MalformedTokenError(HanselError):
    """A special token violates its structural constraints (e.g. minor >= stride)."""


class ConfigError(HanselError):
    """Inconsistent or out-of-range configuration values."""


class EmptyReferenceError(HanselError):
    """An example's reference text is empty and cannot be augmented."""


class CorpusError(HanselError):
    """A corpus file is malformed; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ProtocolError(HanselError):
    """A generation context does not satisfy the token protocol preconditions."""


class NoDataError(HanselError):
    """An aggregate was requested over zero scorable records."""


class JudgeUnavailableError(HanselError):
    """The judge endpoint could not be reached after the configured retries."""


class ScoreParseError(HanselError):
    """The judge response did not contain a usable in-scale score."""

    def __init__(self, message: str, raw: str):
        super().__init__(message)
        self.raw = raw
