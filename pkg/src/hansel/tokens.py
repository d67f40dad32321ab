"""Remaining-length special tokens: data model, rendering, and stream parsing.

A special token carries two non-negative integers, ``major`` and ``minor``.
Against a stride ``delta`` it claims that ``delta * major + minor`` length
units remain until the target length.  The ``minor`` component only ever
appears on the opening token of a stream; periodic tokens count down whole
strides and render in a compact form.

Rendering is template-driven so the wire format can be adapted to a target
tokenizer.  The default templates produce e.g. ``<|len:w:2:5|>`` (25 words
left at stride 10) and the compact ``<|len:w:2|>`` when minor is zero.
Rendered forms contain no whitespace and parse back to the exact token.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache

from .errors import MalformedTokenError, TokenParseError
from .units import LengthUnit


@dataclass(frozen=True)
class SpecialToken:
    unit: LengthUnit
    major: int
    minor: int = 0

    def __post_init__(self):
        if self.major < 0 or self.minor < 0:
            raise MalformedTokenError(
                f"token components must be non-negative, got {self.major}:{self.minor}"
            )

    def remaining(self, delta: int) -> int:
        """Remaining length units claimed by this token under stride ``delta``."""
        if delta < 1:
            raise MalformedTokenError(f"stride must be >= 1, got {delta}")
        if self.minor >= delta:
            raise MalformedTokenError(
                f"minor {self.minor} must be smaller than stride {delta}"
            )
        return delta * self.major + self.minor


def token_for_remaining(remaining: int, delta: int, unit: LengthUnit) -> SpecialToken:
    """Canonical token claiming ``remaining`` units under stride ``delta``."""
    if remaining < 0:
        raise MalformedTokenError(f"remaining must be non-negative, got {remaining}")
    if delta < 1:
        raise MalformedTokenError(f"stride must be >= 1, got {delta}")
    major, minor = divmod(remaining, delta)
    return SpecialToken(unit=unit, major=major, minor=minor)


_PLACEHOLDERS = ("unit", "major", "minor")
_PLACEHOLDER_RE = re.compile(r"\{(unit|major|minor)\}")


@dataclass(frozen=True)
class TokenRendering:
    """Wire format for special tokens.

    ``template`` renders the full form (non-zero minor); ``compact_template``
    renders tokens whose minor is zero.  Both must mention ``{unit}`` and
    ``{major}``; the full form must also mention ``{minor}``.
    """

    template: str = "<|len:{unit}:{major}:{minor}|>"
    compact_template: str = "<|len:{unit}:{major}|>"

    def __post_init__(self):
        for tpl, needs_minor in ((self.template, True), (self.compact_template, False)):
            names = set(_PLACEHOLDER_RE.findall(tpl))
            required = {"unit", "major"} | ({"minor"} if needs_minor else set())
            if not required <= names:
                raise MalformedTokenError(
                    f"template {tpl!r} must contain placeholders {sorted(required)}"
                )
        probe = self.render(SpecialToken(LengthUnit.WORD, 12, 3))
        compact_probe = self.render(SpecialToken(LengthUnit.WORD, 12, 0))
        for rendered in (probe, compact_probe):
            if any(ch.isspace() for ch in rendered):
                raise MalformedTokenError(f"rendered token {rendered!r} contains whitespace")

    def render(self, token: SpecialToken) -> str:
        tpl = self.compact_template if token.minor == 0 else self.template
        return tpl.format(unit=token.unit.code, major=token.major, minor=token.minor)

    @property
    def sentinel(self) -> str:
        """Longest literal prefix shared by both templates before any placeholder.

        Used to spot malformed token-like substrings; an empty sentinel
        disables malformed-syntax detection.
        """
        prefixes = []
        for tpl in (self.template, self.compact_template):
            m = _PLACEHOLDER_RE.search(tpl)
            prefixes.append(tpl[: m.start()] if m else tpl)
        common = []
        for chars in zip(*prefixes):
            if len(set(chars)) != 1:
                break
            common.append(chars[0])
        return "".join(common)


def _template_regex(tpl: str, tag: str) -> str:
    unit_alt = "|".join(re.escape(u.code) for u in LengthUnit)
    parts: list[str] = []
    pos = 0
    for m in _PLACEHOLDER_RE.finditer(tpl):
        parts.append(re.escape(tpl[pos : m.start()]))
        name = m.group(1)
        if name == "unit":
            parts.append(f"(?P<unit_{tag}>{unit_alt})")
        else:
            parts.append(f"(?P<{name}_{tag}>\\d+)")
        pos = m.end()
    parts.append(re.escape(tpl[pos:]))
    return "".join(parts)


@lru_cache(maxsize=32)
def _compiled(rendering: TokenRendering) -> re.Pattern[str]:
    # Full form first so the alternation prefers the longer match.
    full = _template_regex(rendering.template, "f")
    compact = _template_regex(rendering.compact_template, "c")
    return re.compile(f"(?:{full})|(?:{compact})")


@dataclass(frozen=True)
class PlacedToken:
    """A parsed token with its position in the original and stripped texts."""

    token: SpecialToken
    offset: int
    stripped_offset: int


@dataclass(frozen=True)
class ParsedStream:
    tokens: tuple[PlacedToken, ...]
    stripped: str


def parse_token(text: str, rendering: TokenRendering) -> SpecialToken:
    """Parse a string that must be exactly one rendered token."""
    stream = parse_stream(text, rendering)
    if len(stream.tokens) != 1 or stream.stripped:
        raise TokenParseError(f"expected a single rendered token, got {text!r}", 0)
    return stream.tokens[0].token


def parse_stream(text: str, rendering: TokenRendering) -> ParsedStream:
    """Extract all rendered tokens left-to-right and return the stripped text.

    The stripped text is the input minus the exact rendered substrings; no
    whitespace is touched, matching the zero-width insertion rule used by the
    augmenter.  Token-like substrings that start with the rendering's sentinel
    but do not parse raise ``TokenParseError`` with their offset.
    """
    pattern = _compiled(rendering)
    tokens: list[PlacedToken] = []
    pieces: list[str] = []
    spans: list[tuple[int, int]] = []
    prev = 0
    removed = 0
    for m in pattern.finditer(text):
        spans.append((m.start(), m.end()))
        if m.group("unit_f") is not None:
            unit = LengthUnit.from_code(m.group("unit_f"))
            major, minor = int(m.group("major_f")), int(m.group("minor_f"))
        else:
            unit = LengthUnit.from_code(m.group("unit_c"))
            major, minor = int(m.group("major_c")), 0
        tokens.append(
            PlacedToken(
                token=SpecialToken(unit=unit, major=major, minor=minor),
                offset=m.start(),
                stripped_offset=m.start() - removed,
            )
        )
        pieces.append(text[prev : m.start()])
        prev = m.end()
        removed += m.end() - m.start()
    pieces.append(text[prev:])

    sentinel = rendering.sentinel
    if sentinel:
        start = 0
        while True:
            pos = text.find(sentinel, start)
            if pos == -1:
                break
            if not any(s <= pos < e for s, e in spans):
                raise TokenParseError(f"malformed special token near {text[pos:pos+24]!r}", pos)
            start = pos + 1

    return ParsedStream(tokens=tuple(tokens), stripped="".join(pieces))


def strip_tokens(text: str, rendering: TokenRendering) -> str:
    return parse_stream(text, rendering).stripped
