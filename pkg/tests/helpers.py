"""Shared test utilities: random stream builders, stream mutators, oracles."""

from __future__ import annotations

import numpy as np

from hansel import Example, HanselConfig, SpecialToken, parse_stream

WORD_BANK = (
    "alpha", "bravo", "cedar", "delta", "ember", "frost", "grove", "haze",
    "iris", "jade", "koral", "lumen", "maple", "north", "opal", "pine",
)


def random_reference(rng: np.random.Generator, n_words: int) -> str:
    picks = rng.integers(0, len(WORD_BANK), size=n_words)
    words = [WORD_BANK[i] for i in picks]
    for i in range(7, n_words, 8):
        words[i] += "."
    words[-1] += "."
    return " ".join(words)


def random_example(rng: np.random.Generator, n_words: int, ident: str) -> Example:
    return Example(
        id=ident, source="src", reference=random_reference(rng, n_words), task="dialogue"
    )


def stream_items(text: str, cfg: HanselConfig) -> list[tuple[str, object]]:
    """Decompose a token-bearing text into ordered ("tok"|"word", value) items."""
    stream = parse_stream(text, cfg.rendering)
    words: list[tuple[int, str]] = []
    pos = 0
    for w in stream.stripped.split():
        pos = stream.stripped.index(w, pos)
        words.append((pos, w))
        pos += len(w)
    items: list[tuple[str, object]] = []
    ti = wi = 0
    while ti < len(stream.tokens) and wi < len(words):
        if stream.tokens[ti].stripped_offset <= words[wi][0]:
            items.append(("tok", stream.tokens[ti].token))
            ti += 1
        else:
            items.append(("word", words[wi][1]))
            wi += 1
    items.extend(("tok", p.token) for p in stream.tokens[ti:])
    items.extend(("word", w) for _, w in words[wi:])
    return items


def serialize_items(items: list[tuple[str, object]], cfg: HanselConfig) -> str:
    return " ".join(
        cfg.rendering.render(v) if kind == "tok" else v for kind, v in items
    )


def mutate_stream(text: str, cfg: HanselConfig, rng: np.random.Generator) -> str:
    """Apply one semantics-changing single-token mutation to a stream.

    Kinds: bump a token's major, bump its minor, delete it, duplicate it, or
    swap it with an adjacent word.  Every kind changes the protocol content,
    so a conforming stream must stop validating.
    """
    _, delta = cfg.residual_family
    items = stream_items(text, cfg)
    token_at = [i for i, (kind, _) in enumerate(items) if kind == "tok"]
    assert token_at, "cannot mutate a stream without tokens"
    idx = token_at[int(rng.integers(0, len(token_at)))]
    tok: SpecialToken = items[idx][1]
    kind = int(rng.integers(0, 5))

    if kind == 0:  # claim one more stride
        items[idx] = ("tok", SpecialToken(tok.unit, tok.major + 1, tok.minor))
    elif kind == 1:  # claim one more unit (stay parseable under the stride)
        if tok.minor + 1 < delta:
            items[idx] = ("tok", SpecialToken(tok.unit, tok.major, tok.minor + 1))
        else:
            items[idx] = ("tok", SpecialToken(tok.unit, tok.major + 1, 0))
    elif kind == 2:  # delete
        del items[idx]
    elif kind == 3:  # duplicate in place
        items.insert(idx, items[idx])
    else:  # swap with an adjacent word, shifting the boundary by one unit
        neighbor = None
        if idx + 1 < len(items) and items[idx + 1][0] == "word":
            neighbor = idx + 1
        elif idx - 1 >= 0 and items[idx - 1][0] == "word":
            neighbor = idx - 1
        if neighbor is None:
            del items[idx]  # no adjacent word; deletion still breaks the stream
        else:
            items[idx], items[neighbor] = items[neighbor], items[idx]
    return serialize_items(items, cfg)


def brute_force_lcs(a: list[str], b: list[str]) -> int:
    """Exhaustive LCS oracle: enumerate subsequences of the shorter side,
    longest first, and return the first that embeds in the longer side."""
    from itertools import combinations

    short, long_ = (a, b) if len(a) <= len(b) else (b, a)
    for k in range(len(short), 0, -1):
        for combo in combinations(short, k):
            it = iter(long_)
            if all(word in it for word in combo):
                return k
    return 0
