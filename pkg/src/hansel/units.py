"""Text segmentation and length counting.

Lengths are measured in one of four units: words, sentences, characters, or
model tokens.  The rules are deliberately simple and deterministic:

- A *word* is a maximal run of non-whitespace characters.  Hyphenated
  compounds, numbers, and punctuation-bearing runs are single words.
- A *sentence* ends at ``.``, ``!`` or ``?`` when followed by whitespace or
  end of text, unless the run containing the terminator is a known
  abbreviation ("Mr.", "U.S.", ...).
- A *character* is a single code point (whitespace included).
- The *token* unit delegates to a caller-supplied adapter; this package never
  embeds a tokenizer.

Every segmentation keeps exact character spans so that marker insertion and
stripping round-trip byte-for-byte.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable

from .errors import BoundaryError, ConfigError

# Maps a text to ordered, non-overlapping (start, end) unit spans.
TokenAdapter = Callable[[str], "list[tuple[int, int]]"]


class LengthUnit(str, Enum):
    WORD = "word"
    SENTENCE = "sentence"
    CHARACTER = "character"
    TOKEN = "token"

    @property
    def code(self) -> str:
        """One-letter wire code used inside rendered special tokens."""
        return _UNIT_CODES[self]

    @classmethod
    def from_code(cls, code: str) -> "LengthUnit":
        for unit, c in _UNIT_CODES.items():
            if c == code:
                return unit
        raise ConfigError(f"unknown unit code {code!r}")

    @classmethod
    def parse(cls, name: str) -> "LengthUnit":
        name = name.strip().lower()
        if len(name) == 1:
            return cls.from_code(name)
        try:
            return cls(name)
        except ValueError:
            raise ConfigError(f"unknown length unit {name!r}") from None


_UNIT_CODES = {
    LengthUnit.WORD: "w",
    LengthUnit.SENTENCE: "s",
    LengthUnit.CHARACTER: "c",
    LengthUnit.TOKEN: "t",
}

_WORD_RE = re.compile(r"\S+")
_TERMINATORS = frozenset(".!?")

# Conservative, auditable guard list; extend per call when needed.
DEFAULT_ABBREVIATIONS = frozenset(
    {
        "Mr.", "Mrs.", "Ms.", "Dr.", "Prof.", "St.", "Jr.", "Sr.",
        "U.S.", "U.K.", "vs.", "e.g.", "i.e.",
    }
)


@dataclass(frozen=True)
class Segmentation:
    """Ordered unit spans over a text; ``count`` is the text's length in units."""

    unit: LengthUnit
    spans: tuple[tuple[int, int], ...]

    @property
    def count(self) -> int:
        return len(self.spans)

    def texts(self, text: str) -> list[str]:
        return [text[s:e] for s, e in self.spans]


def _word_spans(text: str) -> list[tuple[int, int]]:
    return [(m.start(), m.end()) for m in _WORD_RE.finditer(text)]


def _sentence_spans(text: str, abbreviations: frozenset[str]) -> list[tuple[int, int]]:
    spans: list[tuple[int, int]] = []
    n = len(text)
    start: int | None = None
    for i, ch in enumerate(text):
        if start is None and not ch.isspace():
            start = i
        if start is None or ch not in _TERMINATORS:
            continue
        if i + 1 < n and not text[i + 1].isspace():
            continue
        if ch == ".":
            run_start = i
            while run_start > 0 and not text[run_start - 1].isspace():
                run_start -= 1
            if text[run_start : i + 1] in abbreviations:
                continue
        spans.append((start, i + 1))
        start = None
    if start is not None:
        end = n
        while end > start and text[end - 1].isspace():
            end -= 1
        spans.append((start, end))
    return spans


def segment(
    text: str,
    unit: LengthUnit,
    *,
    abbreviations: frozenset[str] = DEFAULT_ABBREVIATIONS,
    token_adapter: TokenAdapter | None = None,
) -> Segmentation:
    """Split ``text`` into unit spans and count them.

    Empty text yields a zero-count segmentation.  The token unit requires a
    ``token_adapter``; supplying one for other units is an error nobody checks.
    """
    if unit is LengthUnit.WORD:
        spans = _word_spans(text)
    elif unit is LengthUnit.SENTENCE:
        spans = _sentence_spans(text, abbreviations)
    elif unit is LengthUnit.CHARACTER:
        spans = [(i, i + 1) for i in range(len(text))]
    elif unit is LengthUnit.TOKEN:
        if token_adapter is None:
            raise ConfigError("token unit requires an external token adapter")
        spans = list(token_adapter(text))
        for (s0, e0), (s1, e1) in zip(spans, spans[1:]):
            if not (s0 < e0 <= s1 < e1):
                raise ConfigError("token adapter returned unordered or overlapping spans")
    else:  # pragma: no cover - enum is closed
        raise ConfigError(f"unsupported unit {unit}")
    return Segmentation(unit=unit, spans=tuple(spans))


def count(text: str, unit: LengthUnit, **kwargs) -> int:
    return segment(text, unit, **kwargs).count


def boundary_offset(text: str, seg: Segmentation, index: int) -> int:
    """Character offset of the boundary after the ``index``-th unit.

    Index 0 is the boundary before the first unit; index ``count`` is the end
    of the text.  A marker inserted at a boundary binds to the following unit.
    """
    if not 0 <= index <= seg.count:
        raise BoundaryError(
            f"boundary index {index} outside [0, {seg.count}] for {seg.unit.value} unit"
        )
    if index == seg.count:
        return len(text)
    return seg.spans[index][0]


def insert_at_unit_boundary(
    text: str,
    unit: LengthUnit,
    index: int,
    marker: str,
    *,
    abbreviations: frozenset[str] = DEFAULT_ABBREVIATIONS,
    token_adapter: TokenAdapter | None = None,
) -> str:
    """Insert ``marker`` immediately after the ``index``-th unit.

    The marker is spliced in at the boundary offset; no surrounding whitespace
    is added or removed, so deleting the marker substring restores the input
    byte-for-byte.
    """
    seg = segment(text, unit, abbreviations=abbreviations, token_adapter=token_adapter)
    off = boundary_offset(text, seg, index)
    return text[:off] + marker + text[off:]


def splice_markers(text: str, insertions: Iterable[tuple[int, str]]) -> str:
    """Insert many markers at character offsets in one pass.

    ``insertions`` are (offset, marker) pairs; equal offsets keep their given
    order.  Offsets refer to the original text.
    """
    parts: list[str] = []
    prev = 0
    for off, marker in sorted(insertions, key=lambda p: p[0]):
        if not 0 <= off <= len(text):
            raise BoundaryError(f"marker offset {off} outside text of length {len(text)}")
        parts.append(text[prev:off])
        parts.append(marker)
        prev = off
    parts.append(text[prev:])
    return "".join(parts)
