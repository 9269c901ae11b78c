"""Grid-count featurization, sample assembly, session-level splits and the binary dataset file.

Binary layout (all little-endian)::

    b"UAVDS1"
    u32 rows, u32 cols, u32 depth, u32 n_samples
    n_samples records of
        u64 session_id, u64 step
        f32 features[depth][rows][cols]      (slice by slice, each row-major)
        f64 label_x, f64 label_y             (normalized to [0, 1])
    u32 CRC32 of every byte between the magic and the checksum
"""
from __future__ import annotations

import math
import zlib
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import rng
from .errors import FormatError, ValidationError

TEMPORAL_DEPTH = 5
MAGIC = b"UAVDS1"


@dataclass(frozen=True)
class GridConfig:
    rows: int = 20
    cols: int = 20
    temporal_depth: int = TEMPORAL_DEPTH

    def __post_init__(self):
        if self.rows < 4 or self.cols < 4:
            raise ValidationError("grid needs at least 4 rows and 4 columns")
        if self.temporal_depth != TEMPORAL_DEPTH:
            raise ValidationError(f"temporal depth is fixed at {TEMPORAL_DEPTH}")


class Sample(NamedTuple):
    features: np.ndarray  # (rows, cols, depth) raw counts
    label: np.ndarray  # (2,) normalized
    meta: tuple[int, int]  # (session_id, step)


def cell_indices(positions, grid: GridConfig, area) -> tuple[np.ndarray, np.ndarray]:
    """(row, col) of each position; points on the top/right walls go to the last cell."""
    pos = np.asarray(positions, dtype=float).reshape(-1, 2)
    cw, ch = area[0] / grid.cols, area[1] / grid.rows
    row = np.clip(np.floor(pos[:, 1] / ch).astype(np.int64), 0, grid.rows - 1)
    col = np.clip(np.floor(pos[:, 0] / cw).astype(np.int64), 0, grid.cols - 1)
    return row, col


def count_grid(positions, grid: GridConfig, area) -> np.ndarray:
    row, col = cell_indices(positions, grid, area)
    flat = np.bincount(row * grid.cols + col, minlength=grid.rows * grid.cols)
    return flat.reshape(grid.rows, grid.cols)


def featurize(window, grid: GridConfig = GridConfig(), area=(2000.0, 2000.0)) -> np.ndarray:
    """Stack per-cell user counts of 5 consecutive snapshots into a (rows, cols, 5) tensor."""
    if len(window) != grid.temporal_depth:
        raise ValidationError(f"window must hold exactly {grid.temporal_depth} snapshots")
    sids = {s.session_id for s in window}
    if len(sids) != 1:
        raise ValidationError(f"window mixes sessions {sorted(sids)}")
    ts = [s.t for s in window]
    if ts != list(range(ts[0], ts[0] + len(ts))):
        raise ValidationError(f"window steps {ts} are not consecutive")
    return np.stack([count_grid(s.positions, grid, area) for s in window], axis=-1).astype(np.float32)


def normalize_features(x: np.ndarray) -> np.ndarray:
    """Turn raw counts into per-slice fractions (each temporal slice sums to 1)."""
    tot = x.sum(axis=(-3, -2), keepdims=True)
    return x / np.where(tot > 0, tot, 1)


class SampleSet:
    """Columnar container of samples; indexing yields :class:`Sample`."""

    def __init__(self, features, labels, meta):
        self.features = np.asarray(features, dtype=np.float32)
        self.labels = np.asarray(labels, dtype=np.float64).reshape(-1, 2)
        self.meta = np.asarray(meta, dtype=np.int64).reshape(-1, 2)
        if not len(self.features) == len(self.labels) == len(self.meta):
            raise ValidationError("features, labels and meta lengths differ")

    @classmethod
    def empty(cls, grid: GridConfig = GridConfig()):
        return cls(np.zeros((0, grid.rows, grid.cols, grid.temporal_depth), np.float32),
                   np.zeros((0, 2)), np.zeros((0, 2), np.int64))

    def __len__(self):
        return len(self.labels)

    def __getitem__(self, i):
        if isinstance(i, (int, np.integer)):
            return Sample(self.features[i], self.labels[i], (int(self.meta[i, 0]), int(self.meta[i, 1])))
        return SampleSet(self.features[i], self.labels[i], self.meta[i])

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    @property
    def grid(self) -> GridConfig:
        return GridConfig(*self.features.shape[1:])

    @property
    def session_ids(self) -> np.ndarray:
        return np.unique(self.meta[:, 0])

    def __eq__(self, other):
        return (isinstance(other, SampleSet)
                and np.array_equal(self.features, other.features)
                and np.array_equal(self.labels, other.labels)
                and np.array_equal(self.meta, other.meta))

    @staticmethod
    def concat(parts: Sequence["SampleSet"]) -> "SampleSet":
        return SampleSet(np.concatenate([p.features for p in parts]),
                         np.concatenate([p.labels for p in parts]),
                         np.concatenate([p.meta for p in parts]))


def build_samples(sessions, labels, grid: GridConfig = GridConfig(), area=(2000.0, 2000.0)) -> SampleSet:
    """One sample per window ending at steps 4..14 of each session.

    ``labels[session_id][step]`` must hold the oracle result for that instant;
    the sample's label is the oracle center at the window's last step divided
    by the area size.
    """
    D = grid.temporal_depth
    feats, labs, meta = [], [], []
    for s in sessions:
        slices = np.stack([count_grid(p, grid, area) for p in s.positions], axis=-1).astype(np.float32)
        for t in range(D - 1, len(s.positions)):
            try:
                res = labels[s.id][t]
            except (KeyError, IndexError):
                raise ValidationError(f"missing label for session {s.id} step {t}") from None
            feats.append(slices[..., t - D + 1:t + 1])
            labs.append((res.pose.x / area[0], res.pose.y / area[1]))
            meta.append((s.id, t))
    if not feats:
        return SampleSet.empty(grid)
    return SampleSet(np.stack(feats), np.array(labs), np.array(meta))


def split_session_ids(ids, fractions, seed: int):
    """Partition session ids into three disjoint arrays by a seeded permutation."""
    fr = np.asarray(fractions, dtype=float)
    if fr.shape != (3,) or np.any(fr < 0) or not math.isclose(fr.sum(), 1.0, abs_tol=1e-9):
        raise ValidationError(f"split fractions must be three non-negative numbers summing to 1, got {fractions}")
    ids = np.unique(np.asarray(ids, dtype=np.int64))
    perm = rng.generator(seed).permutation(len(ids))
    cuts = np.round(np.cumsum(fr) * len(ids)).astype(int)
    cuts[-1] = len(ids)
    bounds = [0, *cuts]
    parts = []
    for k in range(3):
        chosen = np.sort(ids[perm[bounds[k]:bounds[k + 1]]])
        if fr[k] > 0 and len(chosen) == 0:
            raise ValidationError(f"split part {k} is empty for fractions {tuple(fractions)}")
        parts.append(chosen)
    return tuple(parts)


def split(samples: SampleSet, fractions, seed: int):
    """Split by session into (train, val, test); a session never straddles two parts."""
    parts = split_session_ids(samples.session_ids, fractions, seed)
    return tuple(samples[np.isin(samples.meta[:, 0], ids)] for ids in parts)


def _record_dtype(grid: GridConfig):
    return np.dtype([("meta", "<u8", (2,)),
                     ("features", "<f4", (grid.temporal_depth, grid.rows, grid.cols)),
                     ("label", "<f8", (2,))])


def save_dataset(samples: SampleSet, path) -> None:
    grid = samples.grid
    rec = np.empty(len(samples), dtype=_record_dtype(grid))
    rec["meta"] = samples.meta
    rec["features"] = np.moveaxis(samples.features, -1, 1)
    rec["label"] = samples.labels
    header = np.array([grid.rows, grid.cols, grid.temporal_depth, len(samples)], dtype="<u4").tobytes()
    payload = header + rec.tobytes()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(payload)
        fh.write(np.uint32(zlib.crc32(payload)).astype("<u4").tobytes())


def load_dataset(path) -> SampleSet:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:len(MAGIC)] != MAGIC:
        raise FormatError(f"{path}: not a dataset file (bad magic)")
    if len(blob) < len(MAGIC) + 20:
        raise FormatError(f"{path}: truncated header")
    payload, crc = blob[len(MAGIC):-4], int(np.frombuffer(blob[-4:], "<u4")[0])
    rows, cols, depth, n = (int(v) for v in np.frombuffer(payload[:16], "<u4"))
    try:
        grid = GridConfig(rows, cols, depth)
    except ValidationError as e:
        raise FormatError(f"{path}: bad header ({e})") from None
    dt = _record_dtype(grid)
    if len(payload) != 16 + n * dt.itemsize:
        raise FormatError(f"{path}: truncated or oversized payload")
    if zlib.crc32(payload) != crc:
        raise FormatError(f"{path}: checksum mismatch")
    rec = np.frombuffer(payload[16:], dtype=dt, count=n)
    return SampleSet(np.moveaxis(rec["features"], 1, -1).copy(), rec["label"].copy(),
                     rec["meta"].astype(np.int64))
