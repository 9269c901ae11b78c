"""Deep Q-network: MLP value function, uniform replay, periodic target sync, MSE TD loss."""
from __future__ import annotations

import copy
import math
from dataclasses import dataclass

import numpy as np

from .. import rng as _rng
from ..cnn import AdamState, adam_step, build_mlp, load_model, save_model
from ..cnn.model import Sequential
from ..errors import ConfigError, DivergenceError

QN_MAGIC = b"UAVQN1"


@dataclass(frozen=True)
class DqnConfig:
    episodes: int = 1000
    discount: float = 0.99
    lr: float = 1e-3
    batch_size: int = 32
    replay_capacity: int = 100_000
    target_sync: int = 1000
    learning_starts: int = 500
    eps_start: float = 1.0
    eps_end: float = 0.05
    eps_decay_frac: float = 0.5
    hidden: tuple = (128, 64)
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.discount <= 1:
            raise ConfigError("dqn: discount must lie in (0, 1]")
        if min(self.batch_size, self.replay_capacity, self.target_sync, self.episodes) < 1:
            raise ConfigError("dqn: sizes and intervals must be positive")


class ReplayBuffer:
    """Uniform replay over raw environment states; features are built per sampled batch.

    Keeping states instead of feature vectors holds memory to a few ints per
    transition (the coverage grid's 800 features per state would need over a
    gigabyte at the default capacity).
    """

    def __init__(self, capacity: int, featurize):
        self.featurize = featurize
        self.s = [None] * capacity
        self.s2 = [None] * capacity
        self.a = np.zeros(capacity, dtype=np.int64)
        self.r = np.zeros(capacity)
        self.done = np.zeros(capacity)
        self.capacity, self.size, self._next = capacity, 0, 0

    def add(self, s, a, r, s2, done):
        i = self._next
        self.s[i], self.a[i], self.r[i], self.s2[i], self.done[i] = s, a, r, s2, done
        self._next = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, g, n):
        idx = g.integers(self.size, size=n)
        f = self.featurize
        return (np.stack([f(self.s[i]) for i in idx]), self.a[idx], self.r[idx],
                np.stack([f(self.s2[i]) for i in idx]), self.done[idx])


def td_targets(target_net: Sequential, r, s2, done, gamma: float):
    """r + gamma * max_a Q_target(s', a), with no bootstrap on terminal transitions."""
    nxt = target_net.forward(s2).max(axis=1) if gamma > 0 else 0.0
    return r + gamma * (1.0 - done) * nxt


def td_update(online: Sequential, target_net: Sequential, state: AdamState, batch, gamma: float) -> float:
    """One Adam step on the mean squared TD error of the taken actions; returns the loss."""
    s, a, r, s2, done = batch
    y = td_targets(target_net, r, s2, done, gamma)
    q = online.forward(s)
    err = q[np.arange(len(a)), a] - y
    loss = float(np.mean(err ** 2))
    if not math.isfinite(loss):
        raise DivergenceError("DQN loss became non-finite")
    grad = np.zeros_like(q)
    grad[np.arange(len(a)), a] = 2.0 * err / len(a)
    online.backward(grad)
    adam_step(online.parameters(), online.gradients(), state)
    return loss


@dataclass
class DqnModel:
    net: Sequential
    losses: list

    def q_values(self, features) -> np.ndarray:
        return self.net.forward(np.atleast_2d(features))

    def act(self, env, state) -> int:
        return int(np.argmax(self.q_values(env.features(state))[0]))


def dqn_train(env, cfg: DqnConfig = DqnConfig()) -> DqnModel:
    g = _rng.generator(cfg.seed)
    net = build_mlp(env.n_features, cfg.hidden, env.n_actions, seed=cfg.seed)
    target = copy.deepcopy(net)
    opt = AdamState(lr=cfg.lr)
    buf = ReplayBuffer(cfg.replay_capacity, env.features)
    span = max(1, int(cfg.episodes * cfg.eps_decay_frac))
    steps, losses = 0, []
    for ep in range(cfg.episodes):
        eps = cfg.eps_start + min(1.0, ep / span) * (cfg.eps_end - cfg.eps_start)
        s = env.reset(ep)
        f = env.features(s)
        while True:
            if g.random() < eps:
                a = int(g.integers(env.n_actions))
            else:
                a = int(np.argmax(net.forward(f[None])[0]))
            s2, r, term = env.step(a)
            buf.add(s, a, r, s2, float(term))
            steps += 1
            if buf.size >= max(cfg.learning_starts, cfg.batch_size):
                losses.append(td_update(net, target, opt, buf.sample(g, cfg.batch_size), cfg.discount))
            if steps % cfg.target_sync == 0:
                target = copy.deepcopy(net)
            s, f = s2, env.features(s2)
            if term or env.truncated():
                break
    return DqnModel(net, losses)


def save_dqn(model: DqnModel, path) -> None:
    save_model(model.net, path, magic=QN_MAGIC)


def load_dqn(path) -> DqnModel:
    return DqnModel(load_model(path, magic=QN_MAGIC), [])
