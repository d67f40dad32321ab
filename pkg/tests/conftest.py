from __future__ import annotations

from pathlib import Path

import pytest

from hansel import Example, HanselConfig

# 25-word news-highlight sample used across the golden placement tests.
SAMPLE_HIGHLIGHT = (
    "Famous American foods created across United States. "
    "Connecticut diner claims creation of the hamburger. "
    "Onion rings were courtesy of cook at Pig Stand in Texas."
)

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture
def highlight_example() -> Example:
    return Example(
        id="cnn-001",
        source="(full article text)",
        reference=SAMPLE_HIGHLIGHT,
        task="summarization",
    )


@pytest.fixture
def cfg10() -> HanselConfig:
    return HanselConfig(delta=10, residual_max=2, seed=11)


@pytest.fixture
def dialog_fixture_path() -> Path:
    path = DATA_DIR / "dialog_fixture_6205.jsonl"
    assert path.exists(), "bundled dialogue fixture missing"
    return path


def make_examples(references: list[str], task: str = "dialogue") -> list[Example]:
    return [
        Example(id=f"ex-{i:04d}", source=f"source {i}", reference=ref, task=task)
        for i, ref in enumerate(references)
    ]
