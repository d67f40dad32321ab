"""The length-token wire format, as consumed from augmented JSONL files.

This package talks to the augmentation toolkit exclusively through its file
formats; the rendered-token templates below are that interface's documented
wire format.  The full form carries major and minor counters, the compact
form renders a zero minor:

    <|len:w:2:5|>   ->  2 strides + 5 units remain (word family)
    <|len:w:1|>     ->  exactly 1 stride remains

Both templates are configurable to match whatever the augmentation run used.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator

DEFAULT_TEMPLATE = "<|len:{unit}:{major}:{minor}|>"
DEFAULT_COMPACT_TEMPLATE = "<|len:{unit}:{major}|>"

UNIT_CODES = {"word": "w", "sentence": "s", "character": "c", "token": "t"}

_PLACEHOLDER_RE = re.compile(r"\{(unit|major|minor)\}")


def _template_regex(template: str, tag: str) -> str:
    parts: list[str] = []
    pos = 0
    for m in _PLACEHOLDER_RE.finditer(template):
        parts.append(re.escape(template[pos : m.start()]))
        name = m.group(1)
        if name == "unit":
            parts.append(f"(?P<unit_{tag}>[a-z])")
        else:
            parts.append(f"(?P<{name}_{tag}>\\d+)")
        pos = m.end()
    parts.append(re.escape(template[pos:]))
    return "".join(parts)


@dataclass(frozen=True)
class TokenMatch:
    unit_code: str
    major: int
    minor: int
    start: int
    end: int

    def remaining(self, delta: int) -> int:
        return delta * self.major + self.minor


@dataclass(frozen=True)
class WireFormat:
    template: str = DEFAULT_TEMPLATE
    compact_template: str = DEFAULT_COMPACT_TEMPLATE

    def render(self, unit_code: str, major: int, minor: int) -> str:
        tpl = self.compact_template if minor == 0 else self.template
        return tpl.format(unit=unit_code, major=major, minor=minor)

    def pattern(self) -> re.Pattern[str]:
        full = _template_regex(self.template, "f")
        compact = _template_regex(self.compact_template, "c")
        return re.compile(f"(?:{full})|(?:{compact})")

    def iter_tokens(self, text: str) -> Iterator[TokenMatch]:
        for m in self.pattern().finditer(text):
            if m.group("unit_f") is not None:
                yield TokenMatch(
                    unit_code=m.group("unit_f"),
                    major=int(m.group("major_f")),
                    minor=int(m.group("minor_f")),
                    start=m.start(),
                    end=m.end(),
                )
            else:
                yield TokenMatch(
                    unit_code=m.group("unit_c"),
                    major=int(m.group("major_c")),
                    minor=0,
                    start=m.start(),
                    end=m.end(),
                )

    def strip(self, text: str) -> str:
        return self.pattern().sub("", text)

    def context_target(self, context: str, delta: int) -> int | None:
        """Target length claimed by the last rendered token in a context."""
        last = None
        for match in self.iter_tokens(context):
            last = match
        return last.remaining(delta) if last is not None else None
