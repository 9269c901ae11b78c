"""Mini-batch training and inference for the placement CNN."""
from __future__ import annotations

import copy
import logging
import math
from dataclasses import dataclass

import numpy as np

from .. import rng as _rng
from ..dataset import SampleSet, normalize_features
from ..errors import DivergenceError, ValidationError
from .adam import AdamState, adam_step
from .model import Sequential, build_cnn, mae_loss

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 30
    batch_size: int = 64
    lr: float = 1e-3
    seed: int = 0
    patience: int = 5
    float32: bool = False

    def __post_init__(self):
        if min(self.epochs, self.batch_size, self.patience) < 1 or not self.lr > 0:
            raise ValidationError("epochs, batch_size, patience and lr must be positive")


@dataclass
class History:
    train_mae: list
    val_mae: list
    best_epoch: int = -1


def _inputs(features, dtype):
    return normalize_features(np.asarray(features, dtype=np.float64)).astype(dtype, copy=False)


def evaluate_mae(model: Sequential, data: SampleSet, batch_size=512) -> float:
    total = 0.0
    for i in range(0, len(data), batch_size):
        x = _inputs(data.features[i:i + batch_size], model.dtype)
        total += np.abs(model.forward(x) - data.labels[i:i + batch_size]).sum()
    return total / (2 * len(data))


def train(data: SampleSet, cfg: TrainConfig = TrainConfig(), val: SampleSet | None = None,
          model: Sequential | None = None) -> tuple[Sequential, History]:
    """Fit the CNN with Adam on MAE.

    Batches are drawn in a seeded shuffle each epoch. With a validation set,
    training stops after ``patience`` epochs without improvement and the best
    parameters are restored.
    """
    if len(data) == 0:
        raise ValidationError("training set is empty")
    dtype = np.float32 if cfg.float32 else np.float64
    if model is None:
        model = build_cnn(data.features.shape[1:], seed=cfg.seed, dtype=dtype)
    params = model.parameters()
    state = AdamState(lr=cfg.lr)
    g = _rng.generator(cfg.seed)
    hist = History([], [])
    best, best_params, stale = math.inf, None, 0

    for epoch in range(cfg.epochs):
        order = g.permutation(len(data))
        total = 0.0
        for i in range(0, len(order), cfg.batch_size):
            idx = np.sort(order[i:i + cfg.batch_size])
            x = _inputs(data.features[idx], dtype)
            y = data.labels[idx]
            pred = model.forward(x)
            loss, grad = mae_loss(pred, y)
            if not math.isfinite(loss):
                raise DivergenceError(f"non-finite loss at epoch {epoch}")
            model.backward(grad.astype(dtype), input_grad=False)
            adam_step(params, model.gradients(), state)
            total += loss * len(idx)
        hist.train_mae.append(total / len(data))
        if val is not None and len(val):
            v = evaluate_mae(model, val)
            hist.val_mae.append(v)
            log.info("epoch %d train %.5f val %.5f", epoch, hist.train_mae[-1], v)
            if v < best:
                best, best_params, stale = v, copy.deepcopy(params), 0
                hist.best_epoch = epoch
            else:
                stale += 1
                if stale >= cfg.patience:
                    break
        else:
            log.info("epoch %d train %.5f", epoch, hist.train_mae[-1])
    if best_params is not None:
        for p, b in zip(params, best_params):
            p[...] = b
    return model, hist


def predict(model: Sequential, features, batch: int = 256) -> np.ndarray:
    """Normalized (x, y) for one (rows, cols, 5) tensor, or (N, 2) for a batch; clamped to [0, 1]."""
    f = np.asarray(features)
    single = f.ndim == 3
    f = f[None] if single else f
    # chunked so im2col buffers stay bounded for large evaluation sets
    out = np.concatenate([model.forward(_inputs(f[i:i + batch], model.dtype))
                          for i in range(0, len(f), batch)]) if len(f) else np.zeros((0, 2))
    out = np.clip(out.astype(np.float64), 0.0, 1.0)
    return out[0] if single else out
