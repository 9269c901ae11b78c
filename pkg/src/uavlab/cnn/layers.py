"""Forward/backward kernels and layer objects. Activations are NHWC batches."""
from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import as_strided

from ..errors import ValidationError


def _im2col(x, kh, kw):
    """(N*H*W, kh*kw*C) patch matrix of the zero-padded input, columns ordered (di, dj, c).

    Each patch row ``di`` is one contiguous run of kw*C floats in the padded
    input, so a single strided view covers every patch.
    """
    n, h, w, c = x.shape
    ph, pw = kh // 2, kw // 2
    xp = np.pad(x, ((0, 0), (ph, ph), (pw, pw), (0, 0)))
    sn, sh, sw, sc = xp.strides
    view = as_strided(xp, (n, h, w, kh, kw * c), (sn, sh, sw, sh, sc), writeable=False)
    return np.ascontiguousarray(view).reshape(n * h * w, kh * kw * c)


def conv2d_forward(x, w, b):
    """Same-size cross-correlation (odd kernel, stride 1, zero padding k//2).

    x: (N, H, W, Cin); w: (kh, kw, Cin, Cout); b: (Cout,). Returns (out, cache).
    """
    if (x.ndim != 4 or w.ndim != 4 or x.shape[-1] != w.shape[2] or b.shape != (w.shape[3],)
            or w.shape[0] % 2 == 0 or w.shape[1] % 2 == 0):
        raise ValidationError(f"conv shape mismatch: x{x.shape} w{w.shape} b{b.shape}")
    n, h, wd, _ = x.shape
    cols = _im2col(x, w.shape[0], w.shape[1])
    out = cols @ w.reshape(-1, w.shape[3])
    out += b
    return out.reshape(n, h, wd, -1), (cols, w)


def conv2d_backward(grad_out, cache, input_grad=True):
    """Returns (grad_in, grad_w, grad_b); grad_in is None when ``input_grad`` is false."""
    cols, w = cache
    cout = w.shape[3]
    g = grad_out.reshape(-1, cout)
    grad_w = (cols.T @ g).reshape(w.shape)
    grad_b = g.sum(axis=0)
    if not input_grad:
        return None, grad_w, grad_b
    # input gradient is the same-size correlation of grad_out with the
    # spatially flipped, channel-transposed kernel
    w_flip = np.ascontiguousarray(w[::-1, ::-1].transpose(0, 1, 3, 2))
    gcols = _im2col(grad_out, w.shape[0], w.shape[1])
    grad_in = (gcols @ w_flip.reshape(-1, w.shape[2])).reshape(grad_out.shape[:3] + (w.shape[2],))
    return grad_in, grad_w, grad_b


def relu_forward(x):
    return np.maximum(x, 0), x > 0


def relu_backward(grad_out, mask):
    return grad_out * mask


def maxpool_forward(x, size: int = 2):
    """Non-overlapping max pooling; ties go to the first element in row-major window order."""
    n, h, w, c = x.shape
    if h % size or w % size:
        raise ValidationError(f"pooling needs dimensions divisible by {size}, got {h}x{w}")
    offsets = [(i, j) for i in range(size) for j in range(size)]
    out = x[:, ::size, ::size, :].copy()
    for i, j in offsets[1:]:
        np.maximum(out, x[:, i::size, j::size, :], out=out)
    taken = np.zeros(out.shape, dtype=bool)
    masks = []
    for i, j in offsets:
        m = (x[:, i::size, j::size, :] == out) & ~taken
        taken |= m
        masks.append(m)
    return out, (x.shape, masks, size)


def maxpool_backward(grad_out, cache):
    shape, masks, size = cache
    g = np.zeros(shape, dtype=grad_out.dtype)
    offsets = [(i, j) for i in range(size) for j in range(size)]
    for (i, j), m in zip(offsets, masks):
        g[:, i::size, j::size, :] = grad_out * m
    return g


def dense_forward(x, w, b):
    """x: (N, in); w: (in, out); b: (out,)."""
    if x.ndim != 2 or x.shape[1] != w.shape[0] or b.shape != (w.shape[1],):
        raise ValidationError(f"dense shape mismatch: x{x.shape} w{w.shape} b{b.shape}")
    return x @ w + b, (x, w)


def dense_backward(grad_out, cache):
    x, w = cache
    return grad_out @ w.T, x.T @ grad_out, grad_out.sum(axis=0)


class Layer:
    tag = 0
    params: dict
    grads: dict

    def __init__(self):
        self.params, self.grads = {}, {}

    def shape_fields(self) -> tuple[int, ...]:
        return ()

    def output_shape(self, in_shape):
        return in_shape


class Conv2D(Layer):
    tag = 1

    def __init__(self, in_c, out_c, k=3, rng=None, dtype=np.float64):
        super().__init__()
        rng = rng or np.random.default_rng(0)
        std = np.sqrt(2.0 / (k * k * in_c))
        self.params = {"w": (rng.standard_normal((k, k, in_c, out_c)) * std).astype(dtype),
                       "b": np.zeros(out_c, dtype=dtype)}

    def forward(self, x):
        out, self._cache = conv2d_forward(x, self.params["w"], self.params["b"])
        return out

    def backward(self, g, input_grad=True):
        gx, self.grads["w"], self.grads["b"] = conv2d_backward(g, self._cache, input_grad)
        return gx

    def shape_fields(self):
        return self.params["w"].shape

    def output_shape(self, in_shape):
        return (*in_shape[:2], self.params["w"].shape[3])


class ReLU(Layer):
    tag = 2

    def forward(self, x):
        out, self._mask = relu_forward(x)
        return out

    def backward(self, g):
        return relu_backward(g, self._mask)


class MaxPool2D(Layer):
    tag = 3

    def __init__(self, size=2):
        super().__init__()
        self.size = size

    def forward(self, x):
        out, self._cache = maxpool_forward(x, self.size)
        return out

    def backward(self, g):
        return maxpool_backward(g, self._cache)

    def shape_fields(self):
        return (self.size,)

    def output_shape(self, in_shape):
        return (in_shape[0] // self.size, in_shape[1] // self.size, in_shape[2])


class Flatten(Layer):
    tag = 4

    def forward(self, x):
        self._shape = x.shape
        return x.reshape(len(x), -1)

    def backward(self, g):
        return g.reshape(self._shape)

    def output_shape(self, in_shape):
        return (int(np.prod(in_shape)),)


class Dense(Layer):
    tag = 5

    def __init__(self, n_in, n_out, rng=None, dtype=np.float64, gain=2.0):
        super().__init__()
        rng = rng or np.random.default_rng(0)
        std = np.sqrt(gain / n_in)
        self.params = {"w": (rng.standard_normal((n_in, n_out)) * std).astype(dtype),
                       "b": np.zeros(n_out, dtype=dtype)}

    def forward(self, x):
        out, self._cache = dense_forward(x, self.params["w"], self.params["b"])
        return out

    def backward(self, g):
        gx, self.grads["w"], self.grads["b"] = dense_backward(g, self._cache)
        return gx

    def shape_fields(self):
        return self.params["w"].shape

    def output_shape(self, in_shape):
        return (self.params["w"].shape[1],)
