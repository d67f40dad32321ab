"""Building and loading byte-level tokenizers.

The adapter works with any saved ``tokenizers`` JSON file whose decode is
lossless.  For offline use (tests, demos, small experiments) it can also
train a byte-level BPE from a corpus file's text fields; byte-level models
round-trip arbitrary text exactly, which the masking contract requires.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Iterator

from tokenizers import Tokenizer, decoders, models, pre_tokenizers, trainers


def load_tokenizer(path: str | Path) -> Tokenizer:
    return Tokenizer.from_file(str(path))


def save_tokenizer(tokenizer: Tokenizer, path: str | Path) -> None:
    tokenizer.save(str(path))


def corpus_text_lines(path: str | Path) -> Iterator[str]:
    """Text fields of a corpus or augmented-records JSONL file."""
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            raw = raw.strip()
            if not raw:
                continue
            record = json.loads(raw)
            for field in ("source", "reference", "prompt", "output"):
                value = record.get(field)
                if value:
                    yield value


def train_byte_level_tokenizer(lines: Iterable[str], vocab_size: int = 2000) -> Tokenizer:
    tokenizer = Tokenizer(models.BPE(unk_token=None))
    tokenizer.pre_tokenizer = pre_tokenizers.ByteLevel(add_prefix_space=False)
    tokenizer.decoder = decoders.ByteLevel()
    trainer = trainers.BpeTrainer(
        vocab_size=vocab_size,
        show_progress=False,
        initial_alphabet=pre_tokenizers.ByteLevel.alphabet(),
    )
    tokenizer.train_from_iterator(lines, trainer)
    return tokenizer
