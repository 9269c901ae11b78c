"""Tabular Q-learning and Double Q-learning with an epsilon-greedy behavior policy."""
from __future__ import annotations

import csv
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .. import rng as _rng
from ..errors import FormatError, ValidationError
from .env import ACTIONS, STAY


@dataclass(frozen=True)
class TabularParams:
    episodes: int = 1000
    gamma: float = 0.99
    alpha: float = 0.1  # scaled by 1/sqrt(visits of (s, a))
    eps_start: float = 1.0
    eps_end: float = 0.05
    eps_decay_frac: float = 0.5  # linear decay over this fraction of the episodes
    seed: int = 0


def epsilon(episode: int, p) -> float:
    span = max(1, int(p.episodes * p.eps_decay_frac))
    frac = min(1.0, episode / span)
    return p.eps_start + frac * (p.eps_end - p.eps_start)


def new_table(n_actions: int = len(ACTIONS)):
    return defaultdict(lambda: np.zeros(n_actions))


def greedy(q, code, n_actions: int = len(ACTIONS)) -> int:
    """Greedy action; unseen states stay put (first index wins ties otherwise)."""
    if code not in q:
        return STAY if n_actions == len(ACTIONS) else 0
    return int(np.argmax(q[code]))


def _run(env, p: TabularParams, double: bool):
    if p.episodes < 1:
        raise ValidationError("need at least one episode")
    g = _rng.generator(p.seed)
    nA = env.n_actions
    qa, qb = new_table(nA), new_table(nA)
    visits = defaultdict(lambda: np.zeros(nA))
    for ep in range(p.episodes):
        eps = epsilon(ep, p)
        s = env.reset(ep)
        code = env.encode(s)
        while True:
            if g.random() < eps:
                a = int(g.integers(nA))
            else:
                vals = qa[code] + qb[code] if double else qa[code]
                a = int(np.argmax(vals))
            s2, r, term = env.step(a)
            code2 = env.encode(s2)
            visits[code][a] += 1
            alpha = p.alpha / np.sqrt(visits[code][a])
            if double and g.random() < 0.5:
                upd, other = qb, qa
            else:
                upd, other = qa, qb
            if term:
                target = r
            elif double:
                target = r + p.gamma * other[code2][int(np.argmax(upd[code2]))]
            else:
                target = r + p.gamma * upd[code2].max()
            upd[code][a] += alpha * (target - upd[code][a])
            code = code2
            if term or env.truncated():
                break
    return qa, qb


def q_learning_train(env, p: TabularParams = TabularParams()):
    """Q(s,a) += alpha * (r + gamma * max Q(s',.) - Q(s,a)); returns the table."""
    return _run(env, p, double=False)[0]


def double_q_learning_train(env, p: TabularParams = TabularParams()):
    """Two tables; a fair coin picks which one to update, the other evaluates its argmax."""
    return _run(env, p, double=True)


def merge_double(qa, qb):
    """Greedy table of a Double Q pair: the mean of both estimates."""
    out = new_table(len(next(iter(qa.values()))) if qa else len(ACTIONS))
    for k in set(qa) | set(qb):
        out[k] = (qa[k] + qb[k]) / 2 if (k in qa and k in qb) else (qa[k] if k in qa else qb[k]).copy()
    return out


Q_HEADER = ["state_code", "q_up", "q_down", "q_left", "q_right", "q_stay"]


def save_qtable(q, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(Q_HEADER)
        for code in sorted(q):
            w.writerow([code, *(format(float(v), ".17g") for v in q[code])])


def load_qtable(path):
    q = new_table()
    with open(path, newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        if next(r, None) != Q_HEADER:
            raise ValidationError(f"{path}: unexpected Q-table header")
        for n, line in enumerate(r, 2):
            try:
                code, vals = int(line[0]), np.array([float(v) for v in line[1:]])
            except ValueError:
                raise FormatError(f"{path}:{n}: malformed row {line}") from None
            if vals.shape != (len(ACTIONS),) or not np.all(np.isfinite(vals)):
                raise FormatError(f"{path}:{n}: expected {len(ACTIONS)} finite action values")
            q[code] = vals
    return q
