"""Greedy rollouts of trained RL policies on a session."""
from __future__ import annotations

from ..channel import UavPose
from .env import EnvContext, STAY, UavCoverageEnv
from .tabular import greedy


class TabularPolicy:
    def __init__(self, q):
        self.q = q

    def act(self, env, state) -> int:
        return greedy(self.q, env.encode(state))


class ConstantPolicy:
    def __init__(self, action: int = STAY):
        self.action = action

    def act(self, env, state) -> int:
        return self.action


def rollout(policy, session, ctx: EnvContext = EnvContext()):
    """Greedy rollout from the area-center cell; returns (cells per instant, rewards per move)."""
    env = UavCoverageEnv([session], ctx)
    state = env.reset(0)
    cells = [ctx.start_cell()]
    rewards = []
    for _ in range(len(session.positions) - 1):
        a = policy.act(env, state)
        state, r, _ = env.step(a)
        cells.append((state[2], state[3]))
        rewards.append(r)
    return cells, rewards


def rl_policy_positions(policy, session, ctx: EnvContext = EnvContext()) -> list[UavPose]:
    cells, _ = rollout(policy, session, ctx)
    return [ctx.pose(c) for c in cells]
