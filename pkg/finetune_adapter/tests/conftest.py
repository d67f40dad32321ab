from __future__ import annotations

import json
import subprocess
from pathlib import Path

import pytest

from finetune_adapter import register_tokens, train_byte_level_tokenizer
from finetune_adapter.tokenizer_io import corpus_text_lines

# The augmentation toolkit is consumed strictly through its CLI and file
# formats; these helpers shell out to the installed `hansel` entry point.


def run_primary(*argv: str) -> None:
    proc = subprocess.run(["hansel", *argv], capture_output=True, text=True)
    assert proc.returncode == 0, f"hansel {' '.join(argv)}\n{proc.stderr}"


@pytest.fixture(scope="session")
def work_dir(tmp_path_factory) -> Path:
    return tmp_path_factory.mktemp("adapter")


@pytest.fixture(scope="session")
def corpus_path(work_dir) -> Path:
    path = work_dir / "corpus.jsonl"
    run_primary("make-corpus", "--out", str(path), "--n", "1000", "--seed", "8")
    return path


@pytest.fixture(scope="session")
def trail_records_path(work_dir, corpus_path) -> Path:
    """1000 trail-augmented records (no mixing), stride 20, residual cap 1."""
    path = work_dir / "trail.jsonl"
    run_primary(
        "augment", "--input", str(corpus_path), "--out", str(path),
        "--framework", "hansel", "--no-mix", "--delta", "20",
        "--residual-max", "1", "--seed", "8",
    )
    return path


@pytest.fixture(scope="session")
def mixed_records_path(work_dir, corpus_path) -> Path:
    path = work_dir / "mixed.jsonl"
    run_primary(
        "augment", "--input", str(corpus_path), "--out", str(path),
        "--framework", "hansel", "--delta", "20", "--residual-max", "1",
        "--seed", "8",
    )
    return path


@pytest.fixture(scope="session")
def registered_tokenizer(corpus_path):
    tokenizer = train_byte_level_tokenizer(corpus_text_lines(corpus_path), vocab_size=600)
    register_tokens(tokenizer, delta=20, max_major=10, unit_code="w")
    return tokenizer


def read_jsonl(path: Path) -> list[dict]:
    return [json.loads(line) for line in path.read_text(encoding="utf-8").splitlines() if line]
