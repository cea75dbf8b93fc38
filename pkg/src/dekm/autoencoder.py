"""MLP autoencoder: Xavier init, ReLU hidden layers, Adam, and the
squared-error backprop engine shared by pretraining and the clustering-phase
encoder updates.

Conventions: data is n x d with samples as rows; layer ``i`` computes
``a @ w[i] + b[i]``. The embedding layer and the reconstruction output layer
are linear, every other layer is ReLU. Losses are sums over all samples and
coordinates (not means).
"""

from __future__ import annotations

import base64
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DimensionError, DivergenceError, FormatError

CHECKPOINT_VERSION = 1


@dataclass
class AutoencoderModel:
    dims: list[int]  # encoder widths, input .. embedding; decoder mirrors them
    enc_w: list[np.ndarray]
    enc_b: list[np.ndarray]
    dec_w: list[np.ndarray]
    dec_b: list[np.ndarray]

    @property
    def input_dim(self) -> int:
        return self.dims[0]

    @property
    def embedding_dim(self) -> int:
        return self.dims[-1]

    def encoder_params(self) -> list[np.ndarray]:
        return self.enc_w + self.enc_b

    def all_params(self) -> list[np.ndarray]:
        return self.enc_w + self.enc_b + self.dec_w + self.dec_b

    def copy(self) -> "AutoencoderModel":
        return AutoencoderModel(
            dims=list(self.dims),
            enc_w=[w.copy() for w in self.enc_w],
            enc_b=[b.copy() for b in self.enc_b],
            dec_w=[w.copy() for w in self.dec_w],
            dec_b=[b.copy() for b in self.dec_b],
        )


def xavier_init(dims: list[int], seed: int) -> AutoencoderModel:
    """Build a mirrored autoencoder with Xavier-uniform weights, zero biases."""
    if len(dims) < 2:
        raise ConfigurationError(f"need at least input and embedding widths, got {dims}")
    if any(d < 1 for d in dims):
        raise ConfigurationError(f"layer widths must be >= 1, got {dims}")
    rng = np.random.default_rng(seed)

    def layer(fan_in: int, fan_out: int) -> tuple[np.ndarray, np.ndarray]:
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        w = rng.uniform(-limit, limit, size=(fan_in, fan_out))
        return w, np.zeros(fan_out)

    enc_w, enc_b, dec_w, dec_b = [], [], [], []
    for a, b in zip(dims[:-1], dims[1:]):
        w, bias = layer(a, b)
        enc_w.append(w)
        enc_b.append(bias)
    mirror = dims[::-1]
    for a, b in zip(mirror[:-1], mirror[1:]):
        w, bias = layer(a, b)
        dec_w.append(w)
        dec_b.append(bias)
    return AutoencoderModel(list(dims), enc_w, enc_b, dec_w, dec_b)


def _forward(ws, bs, x):
    """Forward through one MLP chain (linear last layer). Returns the list of
    post-activation values, a[0] being the input."""
    acts = [x]
    last = len(ws) - 1
    for i, (w, b) in enumerate(zip(ws, bs)):
        z = acts[-1] @ w + b
        acts.append(z if i == last else np.maximum(z, 0.0))
    return acts


def _backward(ws, acts, delta):
    """Backprop ``delta`` (dL/d output) through one chain; returns per-layer
    weight/bias gradients and dL/d input."""
    gw = [None] * len(ws)
    gb = [None] * len(ws)
    for i in range(len(ws) - 1, -1, -1):
        if i != len(ws) - 1:
            delta = delta * (acts[i + 1] > 0.0)
        gw[i] = acts[i].T @ delta
        gb[i] = delta.sum(axis=0)
        delta = delta @ ws[i].T
    return gw, gb, delta


def _check_input(m: AutoencoderModel, x: np.ndarray, dim: int, what: str) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != dim:
        raise DimensionError(f"{what} must be n x {dim}, got shape {x.shape}")
    return x


def encode(m: AutoencoderModel, x: np.ndarray) -> np.ndarray:
    x = _check_input(m, x, m.input_dim, "input")
    return _forward(m.enc_w, m.enc_b, x)[-1]


def decode(m: AutoencoderModel, h: np.ndarray) -> np.ndarray:
    h = _check_input(m, h, m.embedding_dim, "embedding")
    return _forward(m.dec_w, m.dec_b, h)[-1]


def reconstruct(m: AutoencoderModel, x: np.ndarray) -> np.ndarray:
    return decode(m, encode(m, x))


def reconstruction_loss(m: AutoencoderModel, x: np.ndarray) -> float:
    x = _check_input(m, x, m.input_dim, "input")
    diff = reconstruct(m, x) - x
    return float(np.sum(diff * diff))


def backprop_reconstruction(m: AutoencoderModel, x: np.ndarray):
    """Gradients of sum ||x - g(f(x))||^2 w.r.t. all parameters.

    Returns (grads, loss) with grads ordered like ``all_params()``.
    """
    x = _check_input(m, x, m.input_dim, "input")
    enc_acts = _forward(m.enc_w, m.enc_b, x)
    dec_acts = _forward(m.dec_w, m.dec_b, enc_acts[-1])
    diff = dec_acts[-1] - x
    loss = float(np.sum(diff * diff))
    dgw, dgb, dh = _backward(m.dec_w, dec_acts, 2.0 * diff)
    egw, egb, _ = _backward(m.enc_w, enc_acts, dh)
    return egw + egb + dgw + dgb, loss


def backprop_embedding(m: AutoencoderModel, x: np.ndarray, targets: np.ndarray):
    """Gradients of sum ||f(x) - targets||^2 w.r.t. encoder parameters only.

    Returns (grads, loss) with grads ordered like ``encoder_params()``.
    """
    x = _check_input(m, x, m.input_dim, "input")
    targets = _check_input(m, targets, m.embedding_dim, "targets")
    if targets.shape[0] != x.shape[0]:
        raise DimensionError(
            f"targets rows {targets.shape[0]} != input rows {x.shape[0]}"
        )
    acts = _forward(m.enc_w, m.enc_b, x)
    diff = acts[-1] - targets
    loss = float(np.sum(diff * diff))
    gw, gb, _ = _backward(m.enc_w, acts, 2.0 * diff)
    return gw + gb, loss


@dataclass
class AdamState:
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)

    @classmethod
    def for_params(cls, params, lr=0.001, beta1=0.9, beta2=0.999, eps=1e-8):
        return cls(
            lr=lr,
            beta1=beta1,
            beta2=beta2,
            eps=eps,
            t=0,
            m=[np.zeros_like(p) for p in params],
            v=[np.zeros_like(p) for p in params],
        )


def adam_step(params, grads, state: AdamState):
    """One Adam update with bias correction. Mutates params/state in place
    and returns them."""
    if len(params) != len(grads) or len(params) != len(state.m):
        raise DimensionError("params, grads and Adam state lengths differ")
    state.t += 1
    b1t = 1.0 - state.beta1 ** state.t
    b2t = 1.0 - state.beta2 ** state.t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        p -= state.lr * (m / b1t) / (np.sqrt(v / b2t) + state.eps)
    return params, state


def pretrain(
    m: AutoencoderModel,
    x: np.ndarray,
    epochs: int = 200,
    batch_size: int = 256,
    seed: int = 0,
    lr: float = 0.001,
):
    """Mini-batch Adam on the reconstruction loss.

    Shuffles per epoch with a generator seeded by ``seed``. Returns the model
    (trained in place) and the per-epoch summed losses.
    """
    if batch_size < 1:
        raise ConfigurationError(f"batch_size must be >= 1, got {batch_size}")
    x = _check_input(m, x, m.input_dim, "input")
    n = x.shape[0]
    rng = np.random.default_rng(seed)
    params = m.all_params()
    adam = AdamState.for_params(params, lr=lr)
    epoch_losses = []
    for epoch in range(epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, batch_size):
            batch = x[order[start : start + batch_size]]
            grads, loss = backprop_reconstruction(m, batch)
            if not np.isfinite(loss):
                raise DivergenceError(f"non-finite loss at epoch {epoch}")
            total += loss
            adam_step(params, grads, adam)
        epoch_losses.append(total)
    return m, epoch_losses


def save_checkpoint(path, m: AutoencoderModel, meta: dict | None = None) -> None:
    """Write the model as versioned JSON; parameters round-trip bit-exactly
    via base64-encoded little-endian float64 buffers."""

    def pack(a: np.ndarray):
        return {
            "shape": list(a.shape),
            "data": base64.b64encode(np.ascontiguousarray(a, dtype="<f8").tobytes()).decode(),
        }

    doc = {
        "version": CHECKPOINT_VERSION,
        "dims": m.dims,
        "enc_w": [pack(a) for a in m.enc_w],
        "enc_b": [pack(a) for a in m.enc_b],
        "dec_w": [pack(a) for a in m.dec_w],
        "dec_b": [pack(a) for a in m.dec_b],
        "meta": meta or {},
    }
    with open(path, "w") as f:
        json.dump(doc, f)


def load_checkpoint(path) -> tuple[AutoencoderModel, dict]:
    with open(path) as f:
        doc = json.load(f)
    if doc.get("version") != CHECKPOINT_VERSION:
        raise FormatError(f"unsupported checkpoint version {doc.get('version')!r}")

    def unpack(entry):
        a = np.frombuffer(base64.b64decode(entry["data"]), dtype="<f8")
        return a.reshape(entry["shape"]).astype(np.float64)

    m = AutoencoderModel(
        dims=list(doc["dims"]),
        enc_w=[unpack(e) for e in doc["enc_w"]],
        enc_b=[unpack(e) for e in doc["enc_b"]],
        dec_w=[unpack(e) for e in doc["dec_w"]],
        dec_b=[unpack(e) for e in doc["dec_b"]],
    )
    return m, doc.get("meta", {})
