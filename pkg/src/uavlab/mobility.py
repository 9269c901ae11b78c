"""Session-based mobile-user trajectories.

Every session places a hotspot uniformly in the area, scatters the users
uniformly in a disk around it and moves each user in a straight line at a
constant speed, reflecting off the area walls.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple

import numpy as np

from . import rng
from .errors import ConfigError, FormatError, ValidationError


class Snapshot(NamedTuple):
    t: int
    positions: np.ndarray  # (n_users, 2)
    session_id: int = -1


@dataclass(frozen=True)
class ScenarioConfig:
    area_w: float = 2000.0
    area_h: float = 2000.0
    n_users: int = 30
    hotspot_radius: float = 600.0
    speed_min: float = 1.0
    speed_max: float = 5.0
    steps_per_session: int = 15
    step_seconds: float = 4.0

    def __post_init__(self):
        if not (self.area_w > 0 and self.area_h > 0):
            raise ConfigError("scenario: area dimensions must be positive")
        if self.n_users < 1:
            raise ConfigError("scenario: n_users must be >= 1")
        if not 0 <= self.hotspot_radius <= min(self.area_w, self.area_h) / 2:
            raise ConfigError("scenario: hotspot_radius must be in [0, min(area)/2]")
        if not 0 <= self.speed_min <= self.speed_max:
            raise ConfigError("scenario: need 0 <= speed_min <= speed_max")
        if self.steps_per_session < 1 or not self.step_seconds > 0:
            raise ConfigError("scenario: steps_per_session and step_seconds must be positive")

    @property
    def area(self) -> tuple[float, float]:
        return (self.area_w, self.area_h)


@dataclass
class Session:
    id: int
    seed: int
    positions: np.ndarray  # (steps, n_users, 2)
    center: tuple[float, float] = field(default=(math.nan, math.nan))

    @property
    def snapshots(self) -> list[Snapshot]:
        return [Snapshot(t, self.positions[t], self.id) for t in range(len(self.positions))]

    def __len__(self):
        return len(self.positions)


def reflect(coord, length):
    """Fold an unbounded coordinate back into [0, length] by specular reflection."""
    period = 2.0 * length
    m = np.mod(coord, period)
    return np.where(m > length, period - m, m)


def generate_session(id: int, seed: int, cfg: ScenarioConfig = ScenarioConfig()) -> Session:
    g = rng.generator(seed)
    R = cfg.hotspot_radius
    cx = g.uniform(R, cfg.area_w - R)
    cy = g.uniform(R, cfg.area_h - R)
    n = cfg.n_users
    rad = R * np.sqrt(g.random(n))
    ang = g.uniform(0.0, 2 * math.pi, n)
    p0 = np.stack([cx + rad * np.cos(ang), cy + rad * np.sin(ang)], axis=1)
    # the disk may graze the walls through rounding only
    p0 = np.clip(p0, 0.0, [cfg.area_w, cfg.area_h])
    heading = g.uniform(0.0, 2 * math.pi, n)
    speed = g.uniform(cfg.speed_min, cfg.speed_max, n)
    vel = np.stack([speed * np.cos(heading), speed * np.sin(heading)], axis=1)

    return Session(id=id, seed=seed, positions=advance(p0, vel, cfg), center=(cx, cy))


def advance(p0, vel, cfg: ScenarioConfig) -> np.ndarray:
    """Constant-velocity positions at every step, (steps, n, 2), reflected into the area."""
    p0 = np.asarray(p0, dtype=float).reshape(-1, 2)
    vel = np.asarray(vel, dtype=float).reshape(-1, 2)
    t = np.arange(cfg.steps_per_session, dtype=float)[:, None, None] * cfg.step_seconds
    free = p0[None] + vel[None] * t
    pos = np.empty_like(free)
    pos[..., 0] = reflect(free[..., 0], cfg.area_w)
    pos[..., 1] = reflect(free[..., 1], cfg.area_h)
    return pos


def generate_scenario(n_sessions: int, master_seed: int, cfg: ScenarioConfig = ScenarioConfig(),
                      start: int = 0) -> Iterator[Session]:
    """Yield sessions ``start .. start + n_sessions - 1``; each is reproducible on its own."""
    if n_sessions < 1:
        raise ValidationError("n_sessions must be >= 1")
    for i in range(start, start + n_sessions):
        yield generate_session(i, rng.split(master_seed, i), cfg)


TRAJ_HEADER = ["session_id", "step", "mu_id", "x_m", "y_m"]


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def write_trajectories(sessions, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRAJ_HEADER)
        for s in sorted(sessions, key=lambda s: s.id):
            for t, snap in enumerate(s.positions):
                for k, (x, y) in enumerate(snap):
                    w.writerow([s.id, t, k, _fmt(x), _fmt(y)])


def read_trajectories(path) -> list[Session]:
    """Parse a trajectories CSV back into sessions (seed is not stored and reads as -1)."""
    rows: dict[int, dict[int, dict[int, tuple[float, float]]]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        header = next(r, None)
        if header != TRAJ_HEADER:
            raise ValidationError(f"{path}: unexpected trajectories header {header}")
        for n, line in enumerate(r, 2):
            try:
                sid, t, k = int(line[0]), int(line[1]), int(line[2])
                xy = (float(line[3]), float(line[4]))
            except (ValueError, IndexError):
                raise FormatError(f"{path}:{n}: malformed row {line}") from None
            rows.setdefault(sid, {}).setdefault(t, {})[k] = xy
    out = []
    for sid in sorted(rows):
        steps = rows[sid]
        ts = sorted(steps)
        if ts != list(range(len(ts))):
            raise ValidationError(f"session {sid}: non-consecutive steps")
        n = len(steps[0])
        pos = np.empty((len(ts), n, 2))
        for t in ts:
            if sorted(steps[t]) != list(range(n)):
                raise ValidationError(f"session {sid} step {t}: inconsistent user ids")
            for k, xy in steps[t].items():
                pos[t, k] = xy
        out.append(Session(id=sid, seed=-1, positions=pos))
    return out
