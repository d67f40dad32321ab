"""Desk-scale extrapolation: token trail versus prompt-only length signal.

Two small n-gram models are trained on the same synthetic corpus, one on a
trail-augmented mix and one on a prompt-length mix.  Both are asked for
targets far outside the corpus's typical lengths.  The trail model follows
its countdown tokens and stays within the residual cap; the prompt model
generates corpus-typical lengths no matter what the prompt requests, so its
error grows with the distance between the target and the corpus mean.
"""

import numpy as np

from hansel import HanselConfig, LengthUnit, count
from hansel.experiments import paired_extrapolation
from hansel.synthetic import make_corpus

corpus = make_corpus(600, seed=20)
lengths = [count(ex.reference, LengthUnit.WORD) for ex in corpus]
print(f"corpus: {len(corpus)} references, "
      f"mean {np.mean(lengths):.1f} words, std {np.std(lengths):.1f}\n")

base = HanselConfig(delta=20, residual_max=1)
targets = (5, 20, 50, 80, 130)
seeds = range(8)

runs = [paired_extrapolation(corpus, base, seed=s, targets=targets, n_sources=30)
        for s in seeds]

print("          mean MAE over seeds")
print("target    trail(hansel)   prompt(gretel)")
for t in targets:
    h = np.mean([r.mae_by_target("hansel")[t] for r in runs])
    g = np.mean([r.mae_by_target("gretel")[t] for r in runs])
    marker = "  <- extrapolation" if t >= 80 else ""
    print(f"{t:>6}    {h:13.2f}   {g:14.2f}{marker}")

flagged = sum(row.report.n_infinite for r in runs for row in r.gretel_rows)
print(f"\nprompt-model generations flagged as runaway and excluded: {flagged}")
print("the trail model emits its zero token on schedule, so it never runs away.")
