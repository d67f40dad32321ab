"""Counter automaton checking token-protocol conformance of a stream.

A conforming stream for stride ``delta`` and effective length ``l`` looks like

    opening(l) [r units] major(l // delta) [delta units] ... [delta units] zero

where the opening token claims ``l`` remaining units (``r = l % delta``), each
periodic token counts down a whole stride, the final token claims zero, and at
most ``residual_max`` units follow it.  When ``r`` is zero the opening token
doubles as the first periodic marker, so no token is repeated at distance 0.

The automaton walks the parsed (unit, token) stream and collects every
violation instead of failing fast, to support corpus audit reports.  In
multi-unit configurations each token family is validated independently
against its own stride, with the shared text as the clock; only the residual
family (the last configured unit) may have trailing units after its zero
token.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass

from .config import HanselConfig
from .errors import MalformedTokenError, TokenParseError
from .tokens import PlacedToken, SpecialToken, parse_stream, token_for_remaining
from .units import LengthUnit, TokenAdapter, segment

KIND_SYNTAX = "syntax"
KIND_MALFORMED = "malformed-token"
KIND_FOREIGN_UNIT = "foreign-unit"
KIND_MISSING = "missing-tokens"
KIND_OPENING = "opening"
KIND_SPACING = "spacing"
KIND_COUNTDOWN = "countdown"
KIND_TERMINATOR = "terminator"
KIND_TRAILING_TOKEN = "trailing-token"
KIND_RESIDUAL = "residual"


@dataclass(frozen=True)
class Violation:
    position: int
    kind: str
    detail: str

    def to_dict(self) -> dict:
        return {"position": self.position, "kind": self.kind, "detail": self.detail}


@dataclass(frozen=True)
class AutomatonVerdict:
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {"ok": self.ok, "violations": [v.to_dict() for v in self.violations]}


def opening_token(effective_length: int, delta: int, unit: LengthUnit) -> SpecialToken:
    """The stream-initial token claiming ``effective_length`` remaining units."""
    return token_for_remaining(effective_length, delta, unit)


def placement_positions(effective_length: int, delta: int) -> list[tuple[int, int]]:
    """Expected post-opening tokens as (units elapsed, remaining units) pairs.

    The opening token sits at position 0 and is not included.  When the
    opening remainder is zero, the first whole-stride marker is suppressed
    because the opening token already covers it.
    """
    major, rest = divmod(effective_length, delta)
    out: list[tuple[int, int]] = []
    for k in range(major + 1):
        if k == 0 and rest == 0:
            continue
        pos = rest + k * delta
        out.append((pos, effective_length - pos))
    return out


def validate(
    text: str,
    config: HanselConfig,
    *,
    token_adapter: TokenAdapter | None = None,
) -> AutomatonVerdict:
    """Run the counter automaton over a token-bearing text.

    Never raises for protocol problems; every violation is reported with the
    character offset (in the original text) it was detected at.
    """
    try:
        stream = parse_stream(text, config.rendering)
    except TokenParseError as exc:
        return AutomatonVerdict(
            violations=(Violation(exc.offset, KIND_SYNTAX, str(exc)),)
        )

    violations: list[Violation] = []
    family_units = {unit for unit, _ in config.families}
    for placed in stream.tokens:
        if placed.token.unit not in family_units:
            violations.append(
                Violation(
                    placed.offset,
                    KIND_FOREIGN_UNIT,
                    f"token of unit {placed.token.unit.value} not in configured families",
                )
            )

    residual_unit = config.residual_family[0]
    for unit, delta in config.families:
        family = [p for p in stream.tokens if p.token.unit == unit]
        allowed_trailing = config.residual_max if unit is residual_unit else 0
        violations.extend(
            _validate_family(
                stream.stripped, family, unit, delta, allowed_trailing, token_adapter
            )
        )

    return AutomatonVerdict(violations=tuple(violations))


def _validate_family(
    stripped: str,
    family: list[PlacedToken],
    unit: LengthUnit,
    delta: int,
    allowed_trailing: int,
    token_adapter: TokenAdapter | None,
) -> list[Violation]:
    violations: list[Violation] = []
    if not family:
        return [Violation(0, KIND_MISSING, f"no {unit.value} tokens in stream")]

    seg = segment(stripped, unit, token_adapter=token_adapter)
    ends = [e for _, e in seg.spans]

    def units_before(placed: PlacedToken) -> int:
        return bisect_right(ends, placed.stripped_offset)

    def remaining_of(placed: PlacedToken) -> int | None:
        try:
            return placed.token.remaining(delta)
        except MalformedTokenError as exc:
            violations.append(Violation(placed.offset, KIND_MALFORMED, str(exc)))
            return None

    opening = family[0]
    opening_pos = units_before(opening)
    if opening_pos != 0:
        violations.append(
            Violation(
                opening.offset,
                KIND_OPENING,
                f"opening token preceded by {opening_pos} {unit.value}(s)",
            )
        )
    effective = remaining_of(opening)
    if effective is None:
        return violations

    expected = placement_positions(effective, delta)
    prev_pos, prev_rem = opening_pos, effective
    zero_placed = opening if effective == 0 else None
    last = opening
    for i, placed in enumerate(family[1:]):
        pos = units_before(placed)
        rem = remaining_of(placed)
        if rem == 0 and zero_placed is None:
            zero_placed = placed
        if i >= len(expected):
            violations.append(
                Violation(placed.offset, KIND_TRAILING_TOKEN, "token after the zero token")
            )
            continue
        want_pos, _ = expected[i]
        if pos != want_pos:
            violations.append(
                Violation(
                    placed.offset,
                    KIND_SPACING,
                    f"token after {pos} {unit.value}(s), expected after {want_pos}",
                )
            )
        if rem is not None:
            elapsed = pos - prev_pos
            if rem != prev_rem - elapsed:
                violations.append(
                    Violation(
                        placed.offset,
                        KIND_COUNTDOWN,
                        f"claims {rem} left after {elapsed} elapsed, "
                        f"previous token claimed {prev_rem}",
                    )
                )
            prev_pos, prev_rem = pos, rem
        last = placed

    if zero_placed is None:
        violations.append(
            Violation(
                last.offset,
                KIND_TERMINATOR,
                f"stream never reaches a zero {unit.value} token",
            )
        )
    else:
        trailing = seg.count - units_before(zero_placed)
        if trailing > allowed_trailing:
            violations.append(
                Violation(
                    zero_placed.offset,
                    KIND_RESIDUAL,
                    f"{trailing} {unit.value}(s) after the zero token, "
                    f"allowed at most {allowed_trailing}",
                )
            )
    return violations
