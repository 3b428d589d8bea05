"""A small 1D CNN written directly in numpy, with hand-derived backprop.

conv(k1) -> ReLU -> maxpool(7) -> conv(k2) -> ReLU -> maxpool(3) -> dense -> sigmoid

Convolutions are valid cross-correlations with stride and dilation 1. Pooling
is non-overlapping and drops any trailing remainder.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .exceptions import ArchitectureError, DivergenceError, UndefinedMetricError

POOL1 = 7
POOL2 = 3
PROB_CLAMP = 1e-7
PARAM_NAMES = ("conv1_w", "conv1_b", "conv2_w", "conv2_b", "fc_w", "fc_b")

CHECKPOINT_MAGIC = b"TSGC"
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class ModelSpec:
    input_len: int
    in_channels: int
    factor: int
    kernel1: int
    kernel2: int
    pool1: int = POOL1
    pool2: int = POOL2

    def layer_lengths(self):
        """(L1, P1, L2, P2); raises ArchitectureError when a layer would be empty."""
        for name in ("input_len", "in_channels", "factor", "kernel1", "kernel2", "pool1", "pool2"):
            if getattr(self, name) < 1:
                raise ArchitectureError(f"{name} must be positive, got {getattr(self, name)}")
        l1 = self.input_len - self.kernel1 + 1
        if l1 < 1:
            raise ArchitectureError(f"conv1: kernel {self.kernel1} longer than input {self.input_len}")
        p1 = l1 // self.pool1
        if p1 < 1:
            raise ArchitectureError(f"pool1: conv1 output length {l1} shorter than pool {self.pool1}")
        l2 = p1 - self.kernel2 + 1
        if l2 < 1:
            raise ArchitectureError(f"conv2: kernel {self.kernel2} longer than pooled length {p1}")
        p2 = l2 // self.pool2
        if p2 < 1:
            raise ArchitectureError(f"pool2: conv2 output length {l2} shorter than pool {self.pool2}")
        return l1, p1, l2, p2

    @property
    def channels1(self):
        return self.in_channels * self.factor

    @property
    def channels2(self):
        return self.in_channels * self.factor ** 2

    @property
    def fc_inputs(self):
        return self.channels2 * self.layer_lengths()[3]

    def param_shapes(self):
        c, c1, c2 = self.in_channels, self.channels1, self.channels2
        return {
            "conv1_w": (c1, c, self.kernel1),
            "conv1_b": (c1,),
            "conv2_w": (c2, c1, self.kernel2),
            "conv2_b": (c2,),
            "fc_w": (1, self.fc_inputs),
            "fc_b": (1,),
        }


def raw_kernel1(resolution, rounding="half_even", base_len=600, base_kernel=18):
    """First kernel width for the raw pipeline, ``round(res / 600 * 18)``, at least 1."""
    x = resolution / base_len * base_kernel
    k = round(x) if rounding == "half_even" else math.floor(x + 0.5)
    return max(1, int(k))


def raw_spec(resolution, rounding="half_even"):
    return ModelSpec(resolution, 1, 5, raw_kernel1(resolution, rounding), 2)


def betti_spec(grid_len=300):
    return ModelSpec(grid_len, 3, 7, 6, 2)


def spectra_spec(grid_len=300, channels=7):
    return ModelSpec(grid_len, channels, 3, 6, 2)


@dataclass
class TrainedModel:
    spec: ModelSpec
    params: dict
    loss_trace: list = field(default_factory=list)

    def copy(self):
        return TrainedModel(self.spec, {k: v.copy() for k, v in self.params.items()}, list(self.loss_trace))


def build(spec, seed=0, dtype=np.float64):
    """Fresh parameters, uniform in +-sqrt(1/fan_in)."""
    spec.layer_lengths()
    rng = np.random.default_rng(seed)
    shapes = spec.param_shapes()
    fan_in = {
        "conv1": spec.in_channels * spec.kernel1,
        "conv2": spec.channels1 * spec.kernel2,
        "fc": spec.fc_inputs,
    }
    params = {}
    for name in PARAM_NAMES:
        bound = np.sqrt(1.0 / fan_in[name.rsplit("_", 1)[0]])
        params[name] = rng.uniform(-bound, bound, size=shapes[name]).astype(dtype)
    return TrainedModel(spec, params)


# ---------------------------------------------------------------------------
# layers

def conv1d(x, w, b):
    """Valid cross-correlation. x (B, C, L), w (O, C, K) -> (B, O, L - K + 1)."""
    win = sliding_window_view(x, w.shape[2], axis=2)  # (B, C, L', K)
    return np.einsum("bclk,ock->bol", win, w, optimize=True) + b[None, :, None]


def conv1d_backward(dout, x, w):
    win = sliding_window_view(x, w.shape[2], axis=2)
    dw = np.einsum("bol,bclk->ock", dout, win, optimize=True)
    db = dout.sum(axis=(0, 2))
    dx = np.zeros_like(x)
    lout = dout.shape[2]
    for k in range(w.shape[2]):
        dx[:, :, k:k + lout] += np.einsum("bol,oc->bcl", dout, w[:, :, k], optimize=True)
    return dx, dw, db


def maxpool1d(x, size):
    """Non-overlapping max pool; returns the pooled values and the argmax within each window."""
    bsz, ch, length = x.shape
    n = length // size
    win = x[:, :, : n * size].reshape(bsz, ch, n, size)
    arg = win.argmax(axis=3)  # first maximum wins ties
    out = np.take_along_axis(win, arg[..., None], axis=3)[..., 0]
    return out, arg


def maxpool1d_backward(dout, arg, size, length):
    bsz, ch, n = dout.shape
    dwin = np.zeros((bsz, ch, n, size), dtype=dout.dtype)
    np.put_along_axis(dwin, arg[..., None], dout[..., None], axis=3)
    dx = np.zeros((bsz, ch, length), dtype=dout.dtype)
    dx[:, :, : n * size] = dwin.reshape(bsz, ch, n * size)
    return dx


def sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


# ---------------------------------------------------------------------------
# model

def _check_batch(spec, x):
    if x.ndim != 3 or x.shape[1] != spec.in_channels or x.shape[2] != spec.input_len:
        raise ValueError(
            f"batch shape {x.shape} does not match (batch, {spec.in_channels}, {spec.input_len})"
        )


def forward(model, inputs):
    """Returns (probabilities of class 1, cache for backward)."""
    p = model.params
    spec = model.spec
    x = np.asarray(inputs, dtype=p["conv1_w"].dtype)
    _check_batch(spec, x)
    z1 = conv1d(x, p["conv1_w"], p["conv1_b"])
    a1 = np.maximum(z1, 0)
    m1, arg1 = maxpool1d(a1, spec.pool1)
    z2 = conv1d(m1, p["conv2_w"], p["conv2_b"])
    a2 = np.maximum(z2, 0)
    m2, arg2 = maxpool1d(a2, spec.pool2)
    flat = m2.reshape(m2.shape[0], -1)
    logits = flat @ p["fc_w"][0] + p["fc_b"][0]
    probs = sigmoid(logits)
    cache = dict(x=x, z1=z1, m1=m1, arg1=arg1, z2=z2, m2=m2, arg2=arg2, flat=flat, probs=probs)
    return probs, cache


def bce_loss(probs, labels):
    p = np.clip(np.asarray(probs, dtype=np.float64), PROB_CLAMP, 1 - PROB_CLAMP)
    y = np.asarray(labels, dtype=np.float64)
    return float(np.mean(-(y * np.log(p) + (1 - y) * np.log1p(-p))))


def backward(model, cache, labels):
    """Gradients of the mean binary cross-entropy with respect to every parameter."""
    p = model.params
    spec = model.spec
    y = np.asarray(labels, dtype=cache["probs"].dtype)
    bsz = y.shape[0]
    dlogits = (cache["probs"] - y) / bsz
    grads = {
        "fc_w": (dlogits @ cache["flat"])[None, :],
        "fc_b": np.array([dlogits.sum()], dtype=dlogits.dtype),
    }
    dm2 = (dlogits[:, None] * p["fc_w"]).reshape(cache["m2"].shape)
    da2 = maxpool1d_backward(dm2, cache["arg2"], spec.pool2, cache["z2"].shape[2])
    dz2 = da2 * (cache["z2"] > 0)
    dm1, grads["conv2_w"], grads["conv2_b"] = conv1d_backward(dz2, cache["m1"], p["conv2_w"])
    da1 = maxpool1d_backward(dm1, cache["arg1"], spec.pool1, cache["z1"].shape[2])
    dz1 = da1 * (cache["z1"] > 0)
    _, grads["conv1_w"], grads["conv1_b"] = conv1d_backward(dz1, cache["x"], p["conv1_w"])
    return grads


def predict_proba(model, inputs, batch_size=256):
    x = np.asarray(inputs)
    out = [forward(model, x[i:i + batch_size])[0] for i in range(0, len(x), batch_size)]
    return np.concatenate(out) if out else np.zeros(0)


def evaluate(model, inputs, labels):
    """Accuracy with the rule ``p >= 0.5 -> class 1``."""
    y = np.asarray(labels)
    if y.size == 0:
        raise UndefinedMetricError("accuracy of an empty dataset is undefined")
    pred = (predict_proba(model, inputs) >= 0.5).astype(int)
    return float(np.mean(pred == y))


@dataclass(frozen=True)
class AdamConfig:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    batch_size: int = 16


def train(model, inputs, labels, epochs=10, optim=AdamConfig(), seed=0):
    """Mini-batch Adam on mean BCE; returns a new TrainedModel with a per-epoch loss trace."""
    x = np.asarray(inputs, dtype=model.params["conv1_w"].dtype)
    y = np.asarray(labels, dtype=x.dtype)
    if len(x) == 0:
        raise ValueError("cannot train on an empty dataset")
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("labels must be 0 or 1")
    out = model.copy()
    params = out.params
    m = {k: np.zeros_like(v) for k, v in params.items()}
    v = {k: np.zeros_like(v) for k, v in params.items()}
    rng = np.random.default_rng(seed)
    step = 0
    trace = []
    for epoch in range(epochs):
        order = rng.permutation(len(x))
        losses, weights = [], []
        for bi, start in enumerate(range(0, len(x), optim.batch_size)):
            idx = order[start:start + optim.batch_size]
            probs, cache = forward(out, x[idx])
            loss = bce_loss(probs, y[idx])
            if not np.isfinite(loss):
                raise DivergenceError(f"non-finite loss at epoch {epoch}, batch {bi}")
            grads = backward(out, cache, y[idx])
            step += 1
            c1 = 1 - optim.beta1 ** step
            c2 = 1 - optim.beta2 ** step
            for k in PARAM_NAMES:
                g = grads[k]
                m[k] = optim.beta1 * m[k] + (1 - optim.beta1) * g
                v[k] = optim.beta2 * v[k] + (1 - optim.beta2) * g * g
                params[k] -= optim.lr * (m[k] / c1) / (np.sqrt(v[k] / c2) + optim.eps)
            losses.append(loss)
            weights.append(len(idx))
        trace.append(float(np.average(losses, weights=weights)))
    out.loss_trace = list(model.loss_trace) + trace
    return out


# ---------------------------------------------------------------------------
# gradient check

def _loss_of(model, x, y):
    return bce_loss(forward(model, x)[0], y)


def gradient_check(model, inputs, labels, h=1e-4, grad_fn=None):
    """Max relative error between analytic and central-difference gradients, per parameter group."""
    grad_fn = backward if grad_fn is None else grad_fn
    x = np.asarray(inputs, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    _, cache = forward(model, x)
    grads = grad_fn(model, cache, y)
    worst = {}
    for name in PARAM_NAMES:
        param = model.params[name]
        num = np.zeros_like(param)
        for i in np.ndindex(param.shape):
            old = param[i]
            param[i] = old + h
            up = _loss_of(model, x, y)
            param[i] = old - h
            down = _loss_of(model, x, y)
            param[i] = old
            num[i] = (up - down) / (2 * h)
        ana = grads[name]
        denom = np.maximum(np.maximum(np.abs(ana), np.abs(num)), 1e-8)
        worst[name] = float(np.max(np.abs(ana - num) / denom))
    return worst


# smallest input that survives both pools with kernels 3/2: 30 -> 28 -> 4 -> 3 -> 1
TINY_SPEC = ModelSpec(input_len=30, in_channels=2, factor=2, kernel1=3, kernel2=2)


def _corrupted_backward(model, cache, labels):
    grads = backward(model, cache, labels)
    grads["conv1_w"] = grads["conv1_w"] * 1.5
    return grads


def tiny_gradcheck(seed=0, batch=4, corrupt=False):
    """Finite-difference check of the float64 tiny network; returns (max error, per-group errors).

    ``corrupt=True`` scales one analytic gradient, a negative control that must fail.
    """
    model = build(TINY_SPEC, seed=seed, dtype=np.float64)
    rng = np.random.default_rng(seed + 1)
    x = rng.normal(size=(batch, TINY_SPEC.in_channels, TINY_SPEC.input_len))
    y = (np.arange(batch) % 2).astype(np.float64)
    errs = gradient_check(model, x, y, grad_fn=_corrupted_backward if corrupt else None)
    return max(errs.values()), errs


# ---------------------------------------------------------------------------
# checkpoints

_SPEC_FIELDS = ("input_len", "in_channels", "factor", "kernel1", "kernel2", "pool1", "pool2")


def save_checkpoint(model, path):
    """Little-endian: b"TSGC", u32 version, 7 u32 spec fields, then float64 parameters."""
    spec = model.spec
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<I", CHECKPOINT_VERSION))
        fh.write(struct.pack("<7I", *(getattr(spec, f) for f in _SPEC_FIELDS)))
        for name in PARAM_NAMES:
            fh.write(np.ascontiguousarray(model.params[name], dtype="<f8").tobytes())


def load_checkpoint(path):
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != CHECKPOINT_MAGIC:
        raise ValueError(f"{path}: not a TSGC checkpoint")
    (version,) = struct.unpack_from("<I", blob, 4)
    if version != CHECKPOINT_VERSION:
        raise ValueError(f"{path}: unsupported checkpoint version {version}")
    fields = struct.unpack_from("<7I", blob, 8)
    spec = ModelSpec(*fields)
    offset = 8 + 7 * 4
    params = {}
    for name, shape in spec.param_shapes().items():
        count = int(np.prod(shape))
        params[name] = np.frombuffer(blob, dtype="<f8", count=count, offset=offset).reshape(shape).astype(np.float64)
        offset += 8 * count
    if offset != len(blob):
        raise ValueError(f"{path}: {len(blob) - offset} trailing bytes")
    return TrainedModel(spec, params)
