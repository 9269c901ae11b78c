"""Gridded single-UAV environment shared by the RL baselines.

The UAV sits at the center of one feature-grid cell and moves one cell per
4 s step. The reward is the number of users it covers (channel predicate at
the radius-maximizing altitude) after the move.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ..channel import ChannelParams, UavPose, max_coverage_radius, pathloss_db, GAMMA_SLACK_DB
from ..dataset import GridConfig, count_grid

ACTIONS = ("up", "down", "left", "right", "stay")
# (d_row, d_col); rows grow with y, so "up" moves north
MOVES = np.array([(1, 0), (-1, 0), (0, -1), (0, 1), (0, 0)])
STAY = 4


class RlState(NamedTuple):
    uav_cell: tuple[int, int]
    user_grid: np.ndarray  # (rows, cols) counts at the current instant


@dataclass(frozen=True)
class EnvContext:
    channel: ChannelParams = ChannelParams()
    grid: GridConfig = GridConfig()
    area: tuple = (2000.0, 2000.0)

    def cell_center(self, cell) -> tuple[float, float]:
        cw, ch = self.area[0] / self.grid.cols, self.area[1] / self.grid.rows
        return ((cell[1] + 0.5) * cw, (cell[0] + 0.5) * ch)

    def start_cell(self) -> tuple[int, int]:
        return (self.grid.rows // 2, self.grid.cols // 2)

    def pose(self, cell) -> UavPose:
        return UavPose(*self.cell_center(cell), max_coverage_radius(self.channel)[1])


def move(cell, action: int, grid: GridConfig) -> tuple[int, int]:
    dr, dc = MOVES[action]
    return (int(np.clip(cell[0] + dr, 0, grid.rows - 1)), int(np.clip(cell[1] + dc, 0, grid.cols - 1)))


def coverage_map(positions, ctx: EnvContext) -> np.ndarray:
    """Covered-user count with the UAV over each cell center.

    ``positions`` is (n, 2) for one instant, giving (rows, cols), or (T, n, 2)
    for a whole session, giving (T, rows, cols).
    """
    h = max_coverage_radius(ctx.channel)[1]
    pos = np.asarray(positions, dtype=float)
    single = pos.ndim == 2
    if single:
        pos = pos[None]
    cw, ch = ctx.area[0] / ctx.grid.cols, ctx.area[1] / ctx.grid.rows
    cx = (np.arange(ctx.grid.cols) + 0.5) * cw
    cy = (np.arange(ctx.grid.rows) + 0.5) * ch
    dx = cx[None, None, :, None] - pos[:, None, None, :, 0]
    dy = cy[None, :, None, None] - pos[:, None, None, :, 1]
    loss = pathloss_db(np.hypot(dx, dy), h, ctx.channel)
    out = np.count_nonzero(loss <= ctx.channel.gamma_db + GAMMA_SLACK_DB, axis=-1)
    return out[0] if single else out


def env_step(state: RlState, action: int, snapshot, ctx: EnvContext = EnvContext()):
    """Move the UAV one cell (clamped) and score it against ``snapshot`` (the next instant)."""
    cell = move(state.uav_cell, action, ctx.grid)
    positions = snapshot.positions if hasattr(snapshot, "positions") else snapshot
    pose = ctx.pose(cell)
    pos = np.asarray(positions, dtype=float).reshape(-1, 2)
    loss = pathloss_db(np.hypot(pos[:, 0] - pose.x, pos[:, 1] - pose.y), pose.h, ctx.channel)
    reward = int(np.count_nonzero(loss <= ctx.channel.gamma_db + GAMMA_SLACK_DB))
    return RlState(cell, count_grid(pos, ctx.grid, ctx.area)), reward


def occupancy_code(user_grid: np.ndarray, blocks: int = 4) -> int:
    """16-bit code of a 4x4 coarsening: bit set where the block count exceeds the block median."""
    rows = np.array_split(np.arange(user_grid.shape[0]), blocks)
    cols = np.array_split(np.arange(user_grid.shape[1]), blocks)
    coarse = np.array([[user_grid[np.ix_(r, c)].sum() for c in cols] for r in rows]).ravel()
    bits = coarse > np.median(coarse)
    return int(np.dot(bits, 1 << np.arange(bits.size)))


class UavCoverageEnv:
    """Episodic environment: one episode per session, starting from the area-center cell.

    Coverage maps, user grids and occupancy codes of every session are
    precomputed, so stepping is a table lookup.
    """

    n_actions = len(ACTIONS)

    def __init__(self, sessions, ctx: EnvContext = EnvContext()):
        self.ctx = ctx
        self.sessions = list(sessions)
        g = ctx.grid
        # int32 keeps thousands of sessions in memory; counts never exceed n_users
        self._cov = [coverage_map(s.positions, ctx).astype(np.int32) for s in self.sessions]
        self._grids = [np.stack([count_grid(p, g, ctx.area) for p in s.positions]).astype(np.int32)
                       for s in self.sessions]
        self._codes = [[occupancy_code(gr) for gr in grids] for grids in self._grids]
        self.n_cells = g.rows * g.cols
        self._ep = None

    def __len__(self):
        return len(self.sessions)

    # state = (episode index, t, row, col)
    def reset(self, episode: int):
        self._ep = episode % len(self.sessions)
        r, c = self.ctx.start_cell()
        self._state = (self._ep, 0, r, c)
        return self._state

    def step(self, action: int):
        ep, t, r, c = self._state
        r, c = move((r, c), action, self.ctx.grid)
        t += 1
        reward = float(self._cov[ep][t, r, c])
        self._state = (ep, t, r, c)
        return self._state, reward, t == len(self._cov[ep]) - 1

    def truncated(self) -> bool:
        return False

    def encode(self, state) -> int:
        ep, t, r, c = state
        return self._codes[ep][t] * self.n_cells + r * self.ctx.grid.cols + c

    def features(self, state) -> np.ndarray:
        ep, t, r, c = state
        grid = self._grids[ep][t].ravel()
        onehot = np.zeros(self.n_cells)
        onehot[r * self.ctx.grid.cols + c] = 1.0
        return np.concatenate([grid / max(grid.sum(), 1), onehot])

    @property
    def n_features(self) -> int:
        return 2 * self.n_cells

    def coverage(self, episode: int, t: int, cell) -> int:
        return int(self._cov[episode][t, cell[0], cell[1]])


class TabularMdp:
    """Small finite MDP with known dynamics, used for diagnostics.

    ``P[s, a]`` is a next-state distribution, ``R[s, a]`` the expected reward.
    Episodes start in a uniformly drawn state and last ``horizon`` steps; the
    truncation is not treated as terminal.
    """

    def __init__(self, P, R, horizon=20, seed=0):
        self.P = np.asarray(P, dtype=float)
        self.R = np.asarray(R, dtype=float)
        self.n_states, self.n_actions = self.R.shape
        self.horizon = horizon
        self._g = np.random.default_rng(seed)

    def reset(self, episode: int):
        self._t = 0
        self._s = int(self._g.integers(self.n_states))
        return self._s

    def step(self, action: int):
        s2 = int(self._g.choice(self.n_states, p=self.P[self._s, action]))
        r = float(self.R[self._s, action])
        self._s = s2
        self._t += 1
        return s2, r, False

    def truncated(self) -> bool:
        return self._t >= self.horizon

    def encode(self, state) -> int:
        return state

    def features(self, state) -> np.ndarray:
        v = np.zeros(self.n_states)
        v[state] = 1.0
        return v

    @property
    def n_features(self) -> int:
        return self.n_states


def value_iteration(P, R, gamma, tol=1e-12, max_iter=100_000):
    """Optimal action values Q* of a finite MDP."""
    P, R = np.asarray(P, float), np.asarray(R, float)
    q = np.zeros_like(R)
    for _ in range(max_iter):
        q_new = R + gamma * P @ q.max(axis=1)
        if np.max(np.abs(q_new - q)) < tol:
            return q_new
        q = q_new
    return q
