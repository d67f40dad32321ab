"""Additive-smoothed n-gram language model over augmented training records.

The model is a deliberately small stand-in for a finetuned LLM: it treats
rendered special tokens as ordinary vocabulary items, so whatever length
signal the training mix carries is available to it and nothing else is.
Training counts (order-1)-context transitions over the concatenated
prompt/output item streams; generation either samples freely or follows the
token protocol (countdown tokens forced at stride boundaries, stop at the
zero token), which isolates the question "does the trail carry the length?"
from "can a trigram count?".
"""

from __future__ import annotations

import json
from bisect import bisect_right
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .augment import AugmentedExample
from .config import HanselConfig
from .errors import ConfigError, ProtocolError
from .protocol import placement_positions
from .tokens import TokenRendering, parse_stream, token_for_remaining
BOS = "<s>"
EOS = "</s>"
SEP = "<sep>"

FORMAT_NAME = "hansel-ngram-counts"
FORMAT_VERSION = 1

_SENTENCE_ENDINGS = (".", "!", "?")


def output_items(output: str, rendering: TokenRendering) -> list[str]:
    """Split a (possibly token-bearing) output into an ordered item stream.

    Rendered special tokens become single items; the words of the stripped
    text keep their order.  A token glued to the following word is emitted
    before that word.
    """
    stream = parse_stream(output, rendering)
    words: list[tuple[int, str]] = []
    offset = 0
    for piece in stream.stripped.split(" "):
        if piece:
            words.append((offset, piece))
        offset += len(piece) + 1
    # Whitespace other than single spaces is rare in our outputs; fall back to
    # a conservative re-scan when the quick split disagrees with reality.
    if "".join(w for _, w in words) != "".join(stream.stripped.split()):
        words = []
        pos = 0
        for w in stream.stripped.split():
            pos = stream.stripped.index(w, pos)
            words.append((pos, w))
            pos += len(w)

    items: list[str] = []
    ti, wi = 0, 0
    tokens = stream.tokens
    while ti < len(tokens) and wi < len(words):
        if tokens[ti].stripped_offset <= words[wi][0]:
            items.append(rendering.render(tokens[ti].token))
            ti += 1
        else:
            items.append(words[wi][1])
            wi += 1
    items.extend(rendering.render(t.token) for t in tokens[ti:])
    items.extend(w for _, w in words[wi:])
    return items


def record_stream(record: AugmentedExample, rendering: TokenRendering, order: int) -> list[str]:
    return (
        [BOS] * (order - 1)
        + record.prompt.split()
        + [SEP]
        + output_items(record.output, rendering)
        + [EOS]
    )


class NgramModel:
    """Counts table with additive smoothing; vocabulary fixed at training."""

    def __init__(self, order: int, alpha: float, vocab: Sequence[str]):
        if order < 1:
            raise ConfigError(f"order must be >= 1, got {order}")
        if alpha <= 0:
            raise ConfigError(f"smoothing constant must be positive, got {alpha}")
        self.order = order
        self.alpha = alpha
        self.vocab = list(vocab)
        self.index = {item: i for i, item in enumerate(self.vocab)}
        self.counts: dict[tuple[int, ...], dict[int, int]] = {}
        self._sampling_cache: dict[tuple[int, ...], tuple[np.ndarray, np.ndarray, int]] = {}

    # -- training ----------------------------------------------------------

    def observe(self, items: Sequence[str]) -> None:
        ids = [self.index[i] for i in items]
        k = self.order - 1
        for i in range(k, len(ids)):
            ctx = tuple(ids[i - k : i])
            bucket = self.counts.setdefault(ctx, {})
            bucket[ids[i]] = bucket.get(ids[i], 0) + 1
        self._sampling_cache.clear()

    # -- probabilities -----------------------------------------------------

    def encode(self, items: Sequence[str]) -> list[int]:
        """Item ids; out-of-vocabulary items map to -1 (contexts containing
        them back off to the smoothed uniform distribution)."""
        return [self.index.get(i, -1) for i in items]

    def _context_ids(self, context: Sequence[int]) -> tuple[int, ...]:
        k = self.order - 1
        ctx = list(context[-k:]) if k else []
        while len(ctx) < k:
            ctx.insert(0, self.index.get(BOS, -1))
        return tuple(ctx)

    def conditional(self, context_items: Sequence[str]) -> np.ndarray:
        """Dense smoothed next-item distribution given a context."""
        ctx = self._context_ids(self.encode(context_items))
        probs = np.full(len(self.vocab), self.alpha, dtype=float)
        for next_id, c in self.counts.get(ctx, {}).items():
            probs[next_id] += c
        return probs / probs.sum()

    def _sampling_entry(self, ctx: tuple[int, ...]):
        entry = self._sampling_cache.get(ctx)
        if entry is None:
            bucket = self.counts.get(ctx, {})
            ids = np.array(sorted(bucket), dtype=np.int64)
            weights = np.array([bucket[i] for i in ids], dtype=np.float64)
            cumulative = np.cumsum(weights) if len(weights) else np.zeros(0)
            total = int(weights.sum())
            entry = (ids, cumulative, total)
            self._sampling_cache[ctx] = entry
        return entry

    def sample_next(
        self,
        context: Sequence[int],
        rng: np.random.Generator,
        allowed: np.ndarray | None = None,
    ) -> int:
        """Draw a next id; ``allowed`` restricts support to a sorted id array.

        Sampling splits the smoothed distribution into its observed-count part
        and the uniform alpha floor, so a draw costs O(logك) instead of O(V).
        """
        ctx = self._context_ids(context)
        ids, cumulative, _ = self._sampling_entry(ctx)
        if allowed is not None:
            keep = np.isin(ids, allowed, assume_unique=True)
            ids = ids[keep]
            weights = np.diff(np.concatenate([[0.0], cumulative]))[keep] if len(cumulative) else np.zeros(0)
            cumulative = np.cumsum(weights)
            support = len(allowed)
        else:
            support = len(self.vocab)
        observed_mass = float(cumulative[-1]) if len(cumulative) else 0.0
        total = observed_mass + self.alpha * support
        u = rng.random() * total
        if u < observed_mass and len(ids):
            return int(ids[bisect_right(cumulative, u)])
        pick = int(rng.integers(0, support))
        return int(allowed[pick]) if allowed is not None else pick

    # -- persistence -------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "format": FORMAT_NAME,
            "version": FORMAT_VERSION,
            "order": self.order,
            "alpha": self.alpha,
            "vocab": self.vocab,
            "counts": {
                ",".join(map(str, ctx)): {str(k): v for k, v in sorted(bucket.items())}
                for ctx, bucket in sorted(self.counts.items())
            },
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True), encoding="utf-8")

    @classmethod
    def from_dict(cls, d: dict) -> "NgramModel":
        if d.get("format") != FORMAT_NAME:
            raise ConfigError(f"not a {FORMAT_NAME} file")
        if d.get("version") != FORMAT_VERSION:
            raise ConfigError(f"unsupported model version {d.get('version')}")
        model = cls(order=d["order"], alpha=d["alpha"], vocab=d["vocab"])
        for ctx_key, bucket in d["counts"].items():
            ctx = tuple(int(x) for x in ctx_key.split(",")) if ctx_key else ()
            model.counts[ctx] = {int(k): int(v) for k, v in bucket.items()}
        return model

    @classmethod
    def load(cls, path: str | Path) -> "NgramModel":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def train_ngram(
    records: Iterable[AugmentedExample],
    rendering: TokenRendering,
    order: int = 3,
    alpha: float = 0.1,
) -> NgramModel:
    """Count transitions over all records' prompt/output streams."""
    records = list(records)
    if not records:
        raise ConfigError("cannot train on an empty record list")
    streams = [record_stream(rec, rendering, order) for rec in records]
    vocab = sorted({item for stream in streams for item in stream} | {BOS, EOS, SEP})
    model = NgramModel(order=order, alpha=alpha, vocab=vocab)
    for stream in streams:
        model.observe(stream)
    return model


# --------------------------------------------------------------------------
# Generation
# --------------------------------------------------------------------------

MODE_FREE = "free"
MODE_PROTOCOL = "protocol_assisted"


def _special_ids(model: NgramModel, rendering: TokenRendering) -> set[int]:
    special = set()
    for item, idx in model.index.items():
        if item in (BOS, EOS, SEP):
            special.add(idx)
            continue
        try:
            stream = parse_stream(item, rendering)
        except Exception:
            continue
        if len(stream.tokens) == 1 and not stream.stripped:
            special.add(idx)
    return special


def context_items_from_text(context: str, rendering: TokenRendering) -> list[str]:
    """Items of a generation context: the prompt line, separator, openers.

    Inference contexts are "source\\nprompt [opening token]"; the model was
    trained without sources, so only the final line feeds the context.  Any
    opening tokens move after the separator, mirroring the training streams
    where the token trail starts the output.
    """
    prompt_line = context.rsplit("\n", 1)[-1]
    prompt_words: list[str] = []
    openers: list[str] = []
    for word in prompt_line.split():
        try:
            stream = parse_stream(word, rendering)
        except Exception:
            prompt_words.append(word)
            continue
        if stream.tokens and not stream.stripped:
            openers.extend(rendering.render(t.token) for t in stream.tokens)
        else:
            prompt_words.append(word)
    return prompt_words + [SEP] + openers


def generate(
    model: NgramModel,
    context: str,
    cfg: HanselConfig,
    mode: str = MODE_FREE,
    *,
    max_len: int | None = None,
    rng: np.random.Generator | None = None,
    seed: int = 0,
) -> str:
    """Generate a continuation for an inference context.

    Free mode samples every item (words, special tokens, end-of-sequence)
    from the smoothed conditionals.  Protocol-assisted mode samples only
    words and force-emits the mandated countdown token whenever the word
    clock reaches a stride boundary, stopping after the zero token plus at
    most the configured residual; it simulates a model that has perfectly
    learned token placement but not content pacing.
    """
    if mode not in (MODE_FREE, MODE_PROTOCOL):
        raise ConfigError(f"unknown generation mode {mode!r}")
    rng = rng if rng is not None else np.random.default_rng(seed)
    max_len = max_len if max_len is not None else cfg.max_tokens

    raw_items = context_items_from_text(context, cfg.rendering)
    special = _special_ids(model, cfg.rendering)
    eos_id = model.index[EOS]
    never = {model.index[BOS], model.index[SEP]}

    if mode == MODE_FREE:
        allowed = np.array(
            sorted(i for i in range(len(model.vocab)) if i not in never), dtype=np.int64
        )
        ids = model.encode(raw_items)
        out: list[str] = []
        while len(out) < max_len:
            nxt = model.sample_next(ids, rng, allowed)
            if nxt == eos_id:
                break
            out.append(model.vocab[nxt])
            ids.append(nxt)
        return " ".join(out)

    # Protocol-assisted: the context must end with an opening token.
    if cfg.multi_unit:
        raise ProtocolError("protocol-assisted generation handles a single token family")
    unit, delta = cfg.residual_family
    tail = raw_items[-1] if raw_items else ""
    try:
        stream = parse_stream(tail, cfg.rendering)
    except Exception:
        stream = None
    if stream is None or len(stream.tokens) != 1 or stream.stripped:
        raise ProtocolError("context does not end with an opening token")
    opening = stream.tokens[0].token
    target = opening.remaining(delta)
    if target < 1:
        raise ProtocolError("opening token must claim at least one remaining unit")

    word_ids = np.array(
        sorted(
            i for i in range(len(model.vocab))
            if i not in special and i != eos_id and i not in never
        ),
        dtype=np.int64,
    )
    if not len(word_ids):
        raise ProtocolError("model vocabulary contains no plain words")
    boundaries = dict(placement_positions(target, delta))
    ids = model.encode(raw_items)
    out = []
    emitted = 0
    while emitted < target:
        if emitted in boundaries:
            rendered = cfg.rendering.render(
                token_for_remaining(boundaries[emitted], delta, unit)
            )
            out.append(rendered)
            ids.append(model.index.get(rendered, -1))
        nxt = model.sample_next(ids, rng, word_ids)
        out.append(model.vocab[nxt])
        ids.append(nxt)
        emitted += 1
    zero = cfg.rendering.render(token_for_remaining(0, delta, unit))
    out.append(zero)
    ids.append(model.index.get(zero, -1))
    if not out[-2].endswith(_SENTENCE_ENDINGS):
        for _ in range(cfg.residual_max):
            nxt = model.sample_next(ids, rng, word_ids)
            out.append(model.vocab[nxt])
            ids.append(nxt)
            emitted += 1
            if model.vocab[nxt].endswith(_SENTENCE_ENDINGS):
                break
    return " ".join(out)


def make_ngram_generator(
    model: NgramModel,
    cfg: HanselConfig,
    mode: str,
    *,
    max_len: int | None = None,
    seed: int = 0,
):
    """A sweep-compatible generator closure with its own deterministic stream."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 7_001 if mode == MODE_FREE else 7_002]))

    def run(context: str) -> str:
        return generate(model, context, cfg, mode, max_len=max_len, rng=rng)

    return run
