"""Dense coverage regressor with hand-written backpropagation.

Model file layout (all little-endian):
  8 bytes   magic ``b"RSMODEL1"``
  uint32    format version (1)
  uint32    number of layer sizes L
  uint32*L  layer sizes, input first
  then for each of the L-1 layers: weights (in x out, row-major) followed by
  biases (out), as float64.
"""
from __future__ import annotations

import struct

import numpy as np

from ..errors import ShapeMismatch

MAGIC = b"RSMODEL1"
VERSION = 1
DEFAULT_SIZES = (4103, 256, 64, 1)


def sigmoid(z):
    # clipping keeps the output strictly inside (0, 1) in float64
    return 1.0 / (1.0 + np.exp(-np.clip(z, -30.0, 30.0)))


class ScorerModel:
    """ReLU hidden layers, logistic output in (0, 1)."""

    def __init__(self, weights, biases):
        self.weights = [np.asarray(w, dtype=float) for w in weights]
        self.biases = [np.asarray(b, dtype=float) for b in biases]
        for w, b in zip(self.weights, self.biases):
            if w.ndim != 2 or b.shape != (w.shape[1],):
                raise ShapeMismatch("bias length must match weight columns")
        for w0, w1 in zip(self.weights, self.weights[1:]):
            if w0.shape[1] != w1.shape[0]:
                raise ShapeMismatch("consecutive layer sizes do not chain")

    @classmethod
    def init(cls, sizes=DEFAULT_SIZES, seed: int = 0) -> "ScorerModel":
        rng = np.random.default_rng(seed)
        ws, bs = [], []
        for n_in, n_out in zip(sizes, sizes[1:]):
            lim = np.sqrt(6.0 / (n_in + n_out))
            ws.append(rng.uniform(-lim, lim, size=(n_in, n_out)))
            bs.append(np.zeros(n_out))
        return cls(ws, bs)

    @property
    def sizes(self) -> tuple[int, ...]:
        return (self.weights[0].shape[0],) + tuple(w.shape[1] for w in self.weights)

    def copy(self) -> "ScorerModel":
        return ScorerModel([w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def params(self):
        return self.weights + self.biases

    def _check(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.sizes[0]:
            raise ShapeMismatch(f"expected {self.sizes[0]} features, got {x.shape[-1]}")
        return x

    def _forward(self, x):
        acts = [x]
        h = x
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ w + b
            h = sigmoid(z) if i == last else np.maximum(z, 0.0)
            acts.append(h)
        return acts

    def forward(self, x):
        """Predicted coverage for one feature vector (scalar) or a batch ``(n, d)``."""
        x = self._check(x)
        single = x.ndim == 1
        out = self._forward(np.atleast_2d(x))[-1][:, 0]
        return float(out[0]) if single else out

    __call__ = forward

    def loss_and_grads(self, x, y):
        """Mean squared error and its gradients with respect to every weight and bias."""
        x = self._check(np.atleast_2d(x))
        y = np.asarray(y, dtype=float).reshape(-1)
        acts = self._forward(x)
        pred = acts[-1][:, 0]
        n = len(y)
        err = pred - y
        loss = float(np.mean(err * err))
        delta = (2.0 / n) * err[:, None] * pred[:, None] * (1.0 - pred[:, None])
        gw = [None] * len(self.weights)
        gb = [None] * len(self.weights)
        for i in range(len(self.weights) - 1, -1, -1):
            gw[i] = acts[i].T @ delta
            gb[i] = delta.sum(axis=0)
            if i:
                delta = (delta @ self.weights[i].T) * (acts[i] > 0)
        return loss, gw, gb

    def save(self, path) -> None:
        sizes = self.sizes
        with open(path, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<II", VERSION, len(sizes)))
            fh.write(struct.pack(f"<{len(sizes)}I", *sizes))
            for w, b in zip(self.weights, self.biases):
                fh.write(np.ascontiguousarray(w, dtype="<f8").tobytes())
                fh.write(np.ascontiguousarray(b, dtype="<f8").tobytes())

    @classmethod
    def load(cls, path) -> "ScorerModel":
        with open(path, "rb") as fh:
            data = fh.read()
        if data[:8] != MAGIC:
            raise ValueError(f"{path}: not a scorer model file")
        version, n = struct.unpack_from("<II", data, 8)
        if version != VERSION:
            raise ValueError(f"{path}: unsupported model version {version}")
        sizes = struct.unpack_from(f"<{n}I", data, 16)
        off = 16 + 4 * n
        ws, bs = [], []
        for n_in, n_out in zip(sizes, sizes[1:]):
            w = np.frombuffer(data, dtype="<f8", count=n_in * n_out, offset=off).reshape(n_in, n_out)
            off += 8 * n_in * n_out
            b = np.frombuffer(data, dtype="<f8", count=n_out, offset=off)
            off += 8 * n_out
            ws.append(w.astype(float))
            bs.append(b.astype(float))
        if off != len(data):
            raise ValueError(f"{path}: {len(data) - off} trailing bytes")
        return cls(ws, bs)


def surrogate_forward(model: ScorerModel, features):
    return model.forward(features)
