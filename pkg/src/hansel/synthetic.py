"""Bundled synthetic corpora for offline, reproducible experiments.

Twenty-six sentence templates (one per theme) generate references of any
requested word length between 3 and 150.  Each template has a fixed head
phrase and a small filler pool, which gives an n-gram model enough repeating
structure to learn from while keeping themes distinguishable.

Also provides a dialogue-shaped fixture writer with a positively skewed
reference-length distribution, for corpus-statistics work at realistic scale.
"""

from __future__ import annotations

from pathlib import Path
from typing import Callable

import numpy as np

from .corpus import TASK_DIALOGUE, Example, write_jsonl

MIN_TEMPLATE_WORDS = 3
MAX_TEMPLATE_WORDS = 150

_THEMES = (
    "anchor", "breeze", "copper", "drift", "ember", "fable", "glacier",
    "harbor", "ivory", "juniper", "kettle", "lantern", "meadow", "nectar",
    "orchard", "pebble", "quarry", "ripple", "saddle", "thicket", "umber",
    "valley", "willow", "yarrow", "zenith", "beacon",
)

_VERBS = ("holds", "carries", "follows", "gathers", "crosses", "shapes")
_NOUNS = ("path", "light", "stone", "field", "river", "tower")

# One filler chain shared by all themes: transition counts stay dense, so a
# small n-gram rarely falls back to its smoothing floor mid-sentence.
_FILLER_CYCLE = (
    "near", "the", "quiet", "path", "and", "the", "bright", "light",
    "over", "the", "narrow", "stone", "past", "the", "heavy", "field",
)


class Template:
    """One themed sentence generator with exact word-count control.

    Sentences open "the <theme> <verb>" and always close "so <theme>." --
    the fixed two-word ending makes sentence-final contexts frequent enough
    that end-of-sequence behavior is learnable from counts alone.
    """

    def __init__(self, index: int, theme: str):
        self.index = index
        self.theme = theme
        self.head = ("the", theme, _VERBS[index % len(_VERBS)])

    def sentence(self, n_words: int) -> str:
        if n_words == 1:
            words = [self.theme]
        elif n_words == 2:
            words = ["so", self.theme]
        else:
            words = list(self.head[: min(len(self.head), n_words - 2)])
            i = 0
            while len(words) < n_words - 2:
                words.append(_FILLER_CYCLE[i % len(_FILLER_CYCLE)])
                i += 1
            words.extend(["so", self.theme])
        words[-1] += "."
        return " ".join(words)

    def reference(self, rng: np.random.Generator, n_words: int) -> str:
        """Multi-sentence text of exactly ``n_words`` words.

        The advertised envelope is [MIN_TEMPLATE_WORDS, MAX_TEMPLATE_WORDS];
        anything >= 1 works, which the skewed dialogue fixture relies on.
        """
        if n_words < 1:
            raise ValueError(f"references need at least one word, got {n_words}")
        sentences = []
        remaining = n_words
        while remaining > 0:
            span = int(np.clip(round(rng.normal(9.0, 3.0)), 3, 15))
            if remaining - span < MIN_TEMPLATE_WORDS:
                span = remaining
            sentences.append(self.sentence(min(span, remaining)))
            remaining -= min(span, remaining)
        return " ".join(sentences)


TEMPLATES = tuple(Template(i, theme) for i, theme in enumerate(_THEMES))


def default_length_sampler(rng: np.random.Generator) -> int:
    """Typical reference length: mean near 18 words, spread 3..60."""
    return int(np.clip(round(rng.lognormal(mean=2.8, sigma=0.45)), 3, 60))


def make_corpus(
    n: int,
    seed: int = 0,
    *,
    task: str = TASK_DIALOGUE,
    length_sampler: Callable[[np.random.Generator], int] = default_length_sampler,
) -> list[Example]:
    """Deterministic synthetic corpus cycling through the templates."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 303]))
    out: list[Example] = []
    for i in range(n):
        template = TEMPLATES[i % len(TEMPLATES)]
        n_words = length_sampler(rng)
        reference = template.reference(rng, n_words)
        source = f"a note about the {template.theme} {_NOUNS[i % len(_NOUNS)]}"
        out.append(
            Example(
                id=f"syn-{i:05d}",
                source=source,
                reference=reference,
                task=task,
                meta={"theme": template.theme, "length": str(n_words)},
            )
        )
    return out


def skewed_dialog_length(rng: np.random.Generator) -> int:
    """Positively skewed reply length, most mass near a dozen words."""
    return int(np.clip(round(rng.lognormal(mean=2.215, sigma=0.703)), 1, 179))


def write_dialog_fixture(path: str | Path, n: int = 6205, seed: int = 20) -> int:
    """Write a dialogue-format JSONL fixture with skewed reference lengths."""
    corpus = make_corpus(
        n,
        seed=seed,
        task=TASK_DIALOGUE,
        length_sampler=lambda rng: max(1, skewed_dialog_length(rng)),
    )
    return write_jsonl(path, (ex.to_dict() for ex in corpus))
