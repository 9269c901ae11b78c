"""Coverage-optimal UAV placement per time instant (the label generator).

With the altitude fixed at the radius-maximizing value, covering a user is
the same as the user lying in a disk of radius ``r_max`` around the UAV's
ground point, so the placement problem is maximum disk coverage. The exact
solver enumerates the vertices of the disk arrangement clipped to the service
rectangle; one of them always attains the optimum.
"""
from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass

import numpy as np

from .channel import ChannelParams, UavPose, max_coverage_radius
from .errors import FormatError, ValidationError

DEFAULT_AREA = (2000.0, 2000.0)

# candidates are built on circles shrunk by this much so that the 1e-6 m
# rounding of a candidate never pushes a boundary user out of the disk
_CANDIDATE_MARGIN = 1e-5
_ROUND_DECIMALS = 6


@dataclass(frozen=True)
class ObjectiveWeights:
    w1: float = 1.0
    w2: float = 0.0
    w3: float = 0.0

    def __post_init__(self):
        if (self.w1, self.w2, self.w3) != (1.0, 0.0, 0.0):
            raise ValidationError("only the pure coverage objective (w1=1, w2=w3=0) is supported")


@dataclass(frozen=True)
class PlacementResult:
    pose: UavPose
    covered: int
    runtime_ns: int = 0


def _as_users(users) -> np.ndarray:
    u = np.asarray(users, dtype=float)
    if u.size == 0:
        raise ValidationError("user list is empty")
    return u.reshape(-1, 2)


def _default_h() -> float:
    return max_coverage_radius(ChannelParams())[1]


def count_covered(center, users, r: float) -> int:
    users = np.asarray(users, dtype=float).reshape(-1, 2)
    d2 = (users[:, 0] - center[0]) ** 2 + (users[:, 1] - center[1]) ** 2
    return int(np.count_nonzero(d2 <= r * r))


def candidate_centers(users: np.ndarray, r: float, area=DEFAULT_AREA) -> np.ndarray:
    """All vertices of the arrangement of radius-``r`` disks around ``users`` inside ``area``.

    Includes the user points, pairwise circle intersections, circle/wall
    intersections and the four corners, clamped into the rectangle and rounded
    to 1e-6 m.
    """
    W, H = area
    rc = r - _CANDIDATE_MARGIN if r > 2 * _CANDIDATE_MARGIN else r
    parts = [users]

    i, j = np.triu_indices(len(users), k=1)
    diff = users[j] - users[i]
    d = np.hypot(diff[:, 0], diff[:, 1])
    ok = (d > 0) & (d <= 2 * rc)
    if np.any(ok):
        mid = (users[i[ok]] + users[j[ok]]) / 2
        dd = d[ok]
        off = np.sqrt(np.maximum(rc * rc - (dd / 2) ** 2, 0.0))
        perp = np.stack([-diff[ok, 1], diff[ok, 0]], axis=1) / dd[:, None]
        parts += [mid + perp * off[:, None], mid - perp * off[:, None]]

    for axis, walls in ((0, (0.0, W)), (1, (0.0, H))):
        for wall in walls:
            gap = np.abs(users[:, axis] - wall)
            hit = gap <= rc
            if not np.any(hit):
                continue
            along = np.sqrt(rc * rc - gap[hit] ** 2)
            other = users[hit, 1 - axis]
            for sgn in (1.0, -1.0):
                pts = np.empty((hit.sum(), 2))
                pts[:, axis] = wall
                pts[:, 1 - axis] = other + sgn * along
                parts.append(pts)

    parts.append(np.array([[0.0, 0.0], [W, 0.0], [0.0, H], [W, H]]))
    cand = np.concatenate(parts)
    cand = np.clip(cand, 0.0, [W, H])
    return np.round(cand, _ROUND_DECIMALS)


def _pick(cand: np.ndarray, counts: np.ndarray) -> int:
    best = np.flatnonzero(counts == counts.max())
    order = np.lexsort((cand[best, 1], cand[best, 0]))
    return int(best[order[0]])


def optimal_placement_exact(users, r: float, area=DEFAULT_AREA, h: float | None = None,
                            centered: bool = False) -> PlacementResult:
    """Center maximizing the number of users within ground distance ``r``.

    Among optimal candidates the lexicographically smallest (x, y) wins. Its
    covered set S is optimal, and every point of the convex region where all
    of S is covered is optimal too. With ``centered`` the returned center is
    the mean of the candidates covering exactly S (the region's vertices),
    which keeps the UAV away from the disk edges; by default the winning
    vertex itself is returned.
    """
    t0 = time.perf_counter_ns()
    u = _as_users(users)
    if not r > 0:
        raise ValidationError("radius must be positive")
    cand = candidate_centers(u, r, area)
    d2 = (cand[:, None, 0] - u[None, :, 0]) ** 2 + (cand[:, None, 1] - u[None, :, 1]) ** 2
    inside = d2 <= r * r
    counts = np.count_nonzero(inside, axis=1)
    k = _pick(cand, counts)
    center, covered = cand[k], int(counts[k])
    if centered:
        same = np.all(inside == inside[k], axis=1)
        mid = np.round(cand[same].mean(axis=0), _ROUND_DECIMALS)
        if count_covered(mid, u, r) == covered:
            center = mid
    elapsed = time.perf_counter_ns() - t0
    return PlacementResult(UavPose(float(center[0]), float(center[1]), _default_h() if h is None else h),
                           covered, elapsed)


def grid_coverage_counts(users, r: float, step: float, area=DEFAULT_AREA):
    """Covered-user count at every grid center, shape (len(ys), len(xs)).

    Each user adds one to the run of grid columns inside its disk on every grid
    row it reaches (difference-array accumulation).
    """
    u = _as_users(users)
    W, H = area
    xs = np.arange(0.0, W + 1e-9 * W, step)
    ys = np.arange(0.0, H + 1e-9 * H, step)
    nx = len(xs)
    diff = np.zeros((len(ys), nx + 1), dtype=np.int32)
    for ux, uy in u:
        j0 = max(0, math.ceil((uy - r) / step))
        j1 = min(len(ys) - 1, math.floor((uy + r) / step))
        if j1 < j0:
            continue
        rows = np.arange(j0, j1 + 1)
        dy = ys[rows] - uy
        half = np.sqrt(np.maximum(r * r - dy * dy, 0.0))
        lo = np.clip(np.ceil((ux - half) / step), 0, nx).astype(np.int64)
        hi = np.clip(np.floor((ux + half) / step) + 1, 0, nx).astype(np.int64)
        keep = hi > lo
        np.add.at(diff, (rows[keep], lo[keep]), 1)
        np.add.at(diff, (rows[keep], hi[keep]), -1)
    return xs, ys, np.cumsum(diff[:, :nx], axis=1)


def optimal_placement_grid(users, r: float, step: float, area=DEFAULT_AREA,
                           h: float | None = None) -> PlacementResult:
    t0 = time.perf_counter_ns()
    if not step > 0:
        raise ValidationError("grid step must be positive")
    if step > min(area):
        raise ValidationError(f"grid step {step} exceeds the area side")
    u = _as_users(users)
    xs, ys, counts = grid_coverage_counts(u, r, step, area)
    best = counts.max()
    jj, ii = np.nonzero(counts == best)
    k = np.lexsort((jj, ii))[0]
    center = (float(xs[ii[k]]), float(ys[jj[k]]))
    covered = count_covered(center, u, r)
    elapsed = time.perf_counter_ns() - t0
    return PlacementResult(UavPose(*center, _default_h() if h is None else h), covered, elapsed)


def label_session(session, p: ChannelParams, area=DEFAULT_AREA) -> list[PlacementResult]:
    """Independent per-instant optimal placement for every snapshot of a session."""
    if len(session.positions) < 1:
        raise ValidationError(f"session {session.id} has no snapshots")
    r, h = max_coverage_radius(p)
    return [optimal_placement_exact(pos, r, area, h) for pos in session.positions]


LABEL_HEADER = ["session_id", "step", "opt_x_m", "opt_y_m", "opt_h_m", "covered"]


def write_labels(labels: dict, path) -> None:
    """``labels`` maps session id to the list of per-step PlacementResults."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(LABEL_HEADER)
        for sid in sorted(labels):
            per_step = labels[sid]
            items = per_step.items() if isinstance(per_step, dict) else enumerate(per_step)
            for t, res in sorted(items, key=lambda kv: kv[0]):
                w.writerow([sid, t, format(res.pose.x, ".17g"), format(res.pose.y, ".17g"),
                            format(res.pose.h, ".17g"), res.covered])


def read_labels(path) -> dict:
    """Inverse of :func:`write_labels`, keyed ``[session_id][step]``.

    Runtimes are not persisted and read back as 0.
    """
    out: dict[int, dict[int, PlacementResult]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        header = next(r, None)
        if header != LABEL_HEADER:
            raise ValidationError(f"{path}: unexpected labels header {header}")
        for n, line in enumerate(r, 2):
            try:
                sid, t = int(line[0]), int(line[1])
                res = PlacementResult(UavPose(float(line[2]), float(line[3]), float(line[4])), int(line[5]))
            except (ValueError, IndexError):
                raise FormatError(f"{path}:{n}: malformed row {line}") from None
            out.setdefault(sid, {})[t] = res
    return out
