"""
Learning to place the UAV
=========================

A small version of the full experiment: simulate sessions, label every
instant with the exact oracle, train the CNN on 5-instant count grids, train
the RL baselines on the same training sessions, and compare coverage on
held-out sessions. Budgets are tiny so this runs in a few minutes; expect
larger gaps than with the desk-scale settings.
"""

import logging

from uavlab.cnn import TrainConfig
from uavlab.pipeline import PipelineConfig, run_pipeline
from uavlab.rl import DqnConfig, TabularParams

logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

cfg = PipelineConfig(
    n_sessions=400,
    fractions=(0.7, 0.1, 0.2),
    train=TrainConfig(epochs=4, float32=True),
    tabular=TabularParams(),
    dqn=DqnConfig(learning_starts=200),
)
res = run_pipeline(cfg)

rep = res.report
print(f"\n{len(rep.instants)} test instants, {rep.n_users} users each")
for row in rep.summary():
    print(f"{row['method']:>9}  covered {row['mean_covered']:6.2f}  gap {row['mean_gap']:5.2f}"
          f"  position error {row['mean_pos_error_m']:6.1f} m")

# fraction of instants where each method covers at least 10 users
for m in rep.methods:
    print(f"{m:>9}  P(covered >= 10) = {1 - rep.cdf(m)[9]:.3f}")
print({k: round(v, 1) for k, v in res.timings.items()})
