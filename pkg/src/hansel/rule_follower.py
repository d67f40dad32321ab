"""Exact rule-following generator.

Simulates a generator that has perfectly internalized the token protocol: it
reads the opening token at the end of its context, emits filler words, drops
the mandated countdown tokens at every stride boundary, and stops at the zero
token (optionally finishing its sentence within the residual allowance).

The text content is meaningless by design; the generator exists so the full
augment/validate/evaluate pipeline can be exercised and bounded without any
trained model: at residual cap 0 its length error is exactly zero, and it is
never more than the cap otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .augment import build_inference_context
from .config import FRAMEWORK_HANSEL, HanselConfig
from .errors import ProtocolError
from .evaluation import EvalRecord, evaluate
from .protocol import placement_positions
from .tokens import parse_stream, strip_tokens, token_for_remaining
from .units import LengthUnit, segment

RESIDUAL_STOP_AT_ZERO = "stop_at_zero"
RESIDUAL_FINISH_SENTENCE = "finish_sentence"

DEFAULT_LEXICON = (
    "time", "year", "people", "way", "day", "thing", "world", "life", "hand",
    "part", "place", "work", "week", "case", "point", "company", "number",
    "group", "problem", "fact", "water", "room", "money", "story", "month",
    "book", "eye", "word", "house", "friend", "father", "power", "hour",
    "game", "line", "city", "name", "team", "minute", "idea",
)


@dataclass(frozen=True)
class RuleFollowerConfig:
    lexicon: tuple[str, ...] = DEFAULT_LEXICON
    mean_sentence_length: float = 8.0
    std_sentence_length: float = 3.0
    min_sentence_length: int = 2
    residual_behavior: str = RESIDUAL_FINISH_SENTENCE
    seed: int = 0

    def __post_init__(self):
        if self.residual_behavior not in (RESIDUAL_STOP_AT_ZERO, RESIDUAL_FINISH_SENTENCE):
            raise ProtocolError(f"unknown residual behavior {self.residual_behavior!r}")
        if not self.lexicon:
            raise ProtocolError("lexicon must be non-empty")


def _read_opening(context: str, cfg: HanselConfig):
    stream = parse_stream(context, cfg.rendering)
    if not stream.tokens:
        raise ProtocolError("context does not end with an opening token")
    last = stream.tokens[-1]
    rendered = cfg.rendering.render(last.token)
    if not context.rstrip().endswith(rendered):
        raise ProtocolError("context does not end with an opening token")
    return last.token


def rule_follow(
    context: str,
    cfg: HanselConfig,
    rf: RuleFollowerConfig | None = None,
    *,
    rng: np.random.Generator | None = None,
) -> str:
    """Generate a protocol-conformant continuation for a context.

    The returned text contains the mandated countdown tokens but not the
    opening token (that one belongs to the context).  With stop_at_zero the
    word count equals the opening token's claim exactly; with finish_sentence
    up to ``cfg.residual_max`` extra words complete the current sentence.
    """
    rf = rf or RuleFollowerConfig()
    if cfg.multi_unit:
        raise ProtocolError("the rule follower handles a single token family")
    unit, delta = cfg.residual_family
    if unit not in (LengthUnit.WORD, LengthUnit.CHARACTER):
        raise ProtocolError(f"rule following in {unit.value} units is not supported")
    opening = _read_opening(context, cfg)
    if opening.unit is not unit:
        raise ProtocolError(
            f"opening token unit {opening.unit.value} does not match config {unit.value}"
        )
    target = opening.remaining(delta)
    if target < 1:
        raise ProtocolError("opening token must claim at least one remaining unit")
    rng = rng if rng is not None else np.random.default_rng(rf.seed)

    boundaries = dict(placement_positions(target, delta))
    items: list[str] = []
    emitted = 0
    sentence_left = 0

    def draw_sentence_length() -> int:
        raw = rng.normal(rf.mean_sentence_length, rf.std_sentence_length)
        return max(rf.min_sentence_length, int(round(raw)))

    def next_word(final: bool) -> str:
        word = rf.lexicon[int(rng.integers(0, len(rf.lexicon)))]
        return word + "." if final else word

    while emitted < target:
        if sentence_left == 0:
            sentence_left = draw_sentence_length()
        if emitted in boundaries:
            remaining = boundaries[emitted]
            items.append(cfg.rendering.render(token_for_remaining(remaining, delta, unit)))
        items.append(next_word(final=sentence_left == 1))
        emitted += 1
        sentence_left -= 1

    items.append(cfg.rendering.render(token_for_remaining(0, delta, unit)))

    if rf.residual_behavior == RESIDUAL_FINISH_SENTENCE and sentence_left > 0:
        extra = min(sentence_left, cfg.residual_max)
        for k in range(extra):
            items.append(next_word(final=k == sentence_left - 1))
    return " ".join(items)


def make_grid_cell_runner(rf: RuleFollowerConfig | None = None, *, max_examples: int | None = None):
    """Cell pipeline for the hyperparameter sweep: augment, follow, measure.

    Each corpus reference becomes a target equal to its own length, the rule
    follower generates against it, and the cell's value is the resulting MAE.
    Each cell derives its own noise stream from (seed, stride, residual cap).
    """
    rf = rf or RuleFollowerConfig()

    def run_cell(corpus, cfg: HanselConfig) -> float:
        unit, delta = cfg.residual_family
        examples = corpus[:max_examples] if max_examples else corpus
        rng = np.random.default_rng(
            np.random.SeedSequence([rf.seed, delta, cfg.residual_max])
        )
        records = []
        for ex in examples:
            target = segment(ex.reference, unit).count
            if target < 1:
                continue
            context = build_inference_context(ex.source, ex.task, target, FRAMEWORK_HANSEL, cfg)
            text = rule_follow(context, cfg, rf, rng=rng)
            records.append(
                EvalRecord(
                    id=f"{ex.id}-cell",
                    generated=strip_tokens(text, cfg.rendering),
                    target_length=target,
                    unit=unit,
                )
            )
        return evaluate(records, cfg).mae

    return run_cell
