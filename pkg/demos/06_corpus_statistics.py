"""Reference-length statistics of a dialogue-shaped corpus.

Generates the bundled skewed dialogue fixture in a temporary location and
summarizes its reference lengths; the same operation over the CLI is
``hansel stats --input corpus.jsonl``.
"""

import tempfile
from pathlib import Path

from hansel import LengthUnit, read_corpus
from hansel.evaluation import corpus_stats
from hansel.synthetic import write_dialog_fixture

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "dialog.jsonl"
    n = write_dialog_fixture(path, n=6205, seed=20)
    corpus = read_corpus(path)
    stats = corpus_stats(corpus, LengthUnit.WORD)

print(f"wrote {n} dialogue-format lines")
for key, value in stats.to_dict().items():
    print(f"  {key:>6}: {value:.2f}" if isinstance(value, float) else f"  {key:>6}: {value}")
print("\nreply lengths are positively skewed: most mass near a dozen words,")
print("with a long tail, which is what makes extrapolation targets interesting.")
