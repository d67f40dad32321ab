"""Stride/residual-cap grid over the rule follower.

A larger residual cap trains (and here, simulates) more graceful sentence
endings at the cost of length precision: the MAE in each row grows with the
cap, and is exactly zero when the cap is zero.
"""

from hansel import HanselConfig, sweep_hyperparams
from hansel.evaluation import grid_table
from hansel.rule_follower import RuleFollowerConfig, make_grid_cell_runner
from hansel.synthetic import make_corpus

corpus = make_corpus(300, seed=21)
cfg = HanselConfig(seed=17)

cells = sweep_hyperparams(
    corpus,
    deltas=[10, 20, 40],
    residual_maxes=[0, 1, 3, 5],
    cell_runner=make_grid_cell_runner(RuleFollowerConfig(seed=17)),
    cfg=cfg,
)

print(grid_table(cells))
print("\neach cell: augment the corpus at that stride/cap, generate against the")
print("reference lengths with the rule follower, and score the MAE.")
