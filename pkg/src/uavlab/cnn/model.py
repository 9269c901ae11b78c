from __future__ import annotations

import numpy as np

from ..errors import ValidationError
from .layers import Conv2D, Dense, Flatten, Layer, MaxPool2D, ReLU


class Sequential:
    def __init__(self, layers: list[Layer]):
        self.layers = list(layers)

    def forward(self, x):
        for layer in self.layers:
            x = layer.forward(x)
        return x

    __call__ = forward

    def backward(self, g, input_grad=True):
        """Backpropagate ``g``; the input gradient is skipped for a leading conv when not needed."""
        for k in range(len(self.layers) - 1, -1, -1):
            layer = self.layers[k]
            if k == 0 and not input_grad and isinstance(layer, Conv2D):
                return layer.backward(g, input_grad=False)
            g = layer.backward(g)
        return g

    def parameters(self) -> list[np.ndarray]:
        return [l.params[k] for l in self.layers for k in sorted(l.params)]

    def gradients(self) -> list[np.ndarray]:
        return [l.grads[k] for l in self.layers for k in sorted(l.params)]

    @property
    def dtype(self):
        ps = self.parameters()
        return ps[0].dtype if ps else np.dtype(np.float64)

    def astype(self, dtype) -> "Sequential":
        for l in self.layers:
            for k in l.params:
                l.params[k] = l.params[k].astype(dtype)
        return self

    def shape_chain(self, in_shape) -> list[tuple]:
        shapes = [tuple(in_shape)]
        for l in self.layers:
            shapes.append(tuple(l.output_shape(shapes[-1])))
        return shapes


def build_cnn(input_shape=(20, 20, 5), widths=(16, 32, 32, 64), hidden=128, seed=0,
              dtype=np.float64) -> Sequential:
    """Four 3x3 conv layers (pool after the 2nd and 4th), a hidden dense layer and a linear 2-output head."""
    h, w, c = input_shape
    if h % 4 or w % 4:
        raise ValidationError("input height and width must be divisible by 4")
    rng = np.random.default_rng(seed)
    c1, c2, c3, c4 = widths
    layers = [
        Conv2D(c, c1, rng=rng, dtype=dtype), ReLU(),
        Conv2D(c1, c2, rng=rng, dtype=dtype), ReLU(), MaxPool2D(2),
        Conv2D(c2, c3, rng=rng, dtype=dtype), ReLU(),
        Conv2D(c3, c4, rng=rng, dtype=dtype), ReLU(), MaxPool2D(2),
        Flatten(),
        Dense((h // 4) * (w // 4) * c4, hidden, rng=rng, dtype=dtype), ReLU(),
        Dense(hidden, 2, rng=rng, dtype=dtype, gain=1.0),
    ]
    return Sequential(layers)


def build_mlp(n_in, hidden=(128, 64), n_out=5, seed=0, dtype=np.float64) -> Sequential:
    rng = np.random.default_rng(seed)
    layers: list[Layer] = []
    prev = n_in
    for width in hidden:
        layers += [Dense(prev, width, rng=rng, dtype=dtype), ReLU()]
        prev = width
    layers.append(Dense(prev, n_out, rng=rng, dtype=dtype, gain=1.0))
    return Sequential(layers)


def mae_loss(pred, target):
    """Mean absolute error over all elements and its subgradient (0 where pred == target)."""
    diff = np.asarray(pred) - np.asarray(target)
    return float(np.abs(diff).mean()), np.sign(diff) / diff.size


def mse_loss(pred, target):
    diff = np.asarray(pred) - np.asarray(target)
    return float((diff ** 2).mean()), 2.0 * diff / diff.size
