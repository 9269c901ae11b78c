"""
RL baselines on a toy MDP and on the coverage grid
==================================================

Tabular Q-learning is checked against value iteration on a 3-state MDP
first. Then an agent is trained on the 20 x 20 cell grid, where a move is
one cell per 4 s step and the reward is the number of covered users, and is
compared with simply hovering over the area center.
"""

import numpy as np

from uavlab.mobility import generate_scenario
from uavlab.rl import (ConstantPolicy, EnvContext, TabularMdp, TabularParams, TabularPolicy,
                       UavCoverageEnv, q_learning_train, rollout, value_iteration)

# a loop of three states; reward only for staying in state 2
P = np.zeros((3, 2, 3))
R = np.zeros((3, 2))
P[0, 0, 0] = P[0, 1, 1] = P[1, 0, 0] = P[1, 1, 2] = P[2, 0, 2] = P[2, 1, 0] = 1.0
R[2, 0] = 1.0
q_star = value_iteration(P, R, 0.9)
q = q_learning_train(TabularMdp(P, R, horizon=20, seed=1), TabularParams(episodes=3000, gamma=0.9, alpha=1.0))
print("Q* =\n", q_star.round(4))
print("max |Q - Q*| =", np.abs(np.array([q[s] for s in range(3)]) - q_star).max())

# the coverage environment
sessions = list(generate_scenario(300, master_seed=5))
train, test = sessions[:250], sessions[250:]
env = UavCoverageEnv(train)
q = q_learning_train(env, TabularParams(episodes=3 * len(train)))
print(f"\n{len(q)} distinct tabular states visited")

ctx = EnvContext()
for name, pol in (("stay at center", ConstantPolicy()), ("q-learning", TabularPolicy(q))):
    total = [sum(rollout(pol, s, ctx)[1]) for s in test]
    print(f"{name:>15}: mean reward per session {np.mean(total):.1f}")



# How much of what the greedy agent meets on test sessions was seen in training?
# Unseen states fall back to "stay".
test_env = UavCoverageEnv(test)
hits = []
for e in range(len(test)):
    st = test_env.reset(e)
    for _ in range(14):
        code = test_env.encode(st)
        hits.append(code in q)
        st, _, _ = test_env.step(TabularPolicy(q).act(test_env, st))
print(f"share of visited test states seen in training: {np.mean(hits):.1%}")
