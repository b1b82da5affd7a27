"""Linear fixed-context baselines and the streaming LSTM classifier.

The LSTM is a single uni-directional layer with 64 hidden units and a biased
2-way output projection.  Gate parameters are packed along one axis of size
``4 * hidden`` in the order input, forget, candidate, output, with a single
shared gate bias vector; this layout is also the serialization order.

Parameters are held as float32 (the serialized precision); all arithmetic
runs in float64.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import CorruptModelFile, DimensionMismatch
from .pose_features import NormalizationMode, PointSubset

HIDDEN_UNITS = 64
LINEAR_POINTS = 25  # linear baselines read the body landmarks only

MODEL_MAGIC = b"SGNS"
MODEL_FORMAT_VERSION = 1

_KIND_LSTM = 1
_KIND_LINEAR = 2

_SUBSET_CODES = {
    PointSubset.POSE_ALL: 0,
    PointSubset.POSE_BODY: 1,
    PointSubset.POSE_HANDS: 2,
    PointSubset.BBOX: 3,
}
_SUBSETS_BY_CODE = {v: k for k, v in _SUBSET_CODES.items()}

_NORM_CODES = {
    NormalizationMode.PER_SEQUENCE: 0,
    NormalizationMode.TRAILING_WINDOW: 1,
}
_NORMS_BY_CODE = {v: k for k, v in _NORM_CODES.items()}


def _sigmoid(v: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        return 1.0 / (1.0 + np.exp(-v))


@dataclass
class LstmState:
    """Hidden and cell vectors carried between steps."""

    h: np.ndarray
    c: np.ndarray

    @classmethod
    def zeros(cls, hidden: int = HIDDEN_UNITS) -> "LstmState":
        return cls(np.zeros(hidden), np.zeros(hidden))


@dataclass
class LstmClassifier:
    """One-layer LSTM over per-frame features with a 2-way projection head."""

    w_x: np.ndarray     # (4H, D) input weights, gate-packed rows
    w_h: np.ndarray     # (4H, H) recurrent weights
    b: np.ndarray       # (4H,) shared gate bias
    w_proj: np.ndarray  # (2, H) projection weights
    b_proj: np.ndarray  # (2,) projection bias
    subset: PointSubset = PointSubset.POSE_BODY
    norm_mode: NormalizationMode = NormalizationMode.PER_SEQUENCE

    def __post_init__(self):
        hidden = self.w_h.shape[1]
        if self.w_x.shape[0] != 4 * hidden or self.w_h.shape != (4 * hidden, hidden):
            raise DimensionMismatch("gate matrices disagree on the hidden size")
        if self.b.shape != (4 * hidden,) or self.w_proj.shape != (2, hidden) or self.b_proj.shape != (2,):
            raise DimensionMismatch("bias or projection shapes are inconsistent")

    @property
    def input_dim(self) -> int:
        return self.w_x.shape[1]

    @property
    def hidden_dim(self) -> int:
        return self.w_h.shape[1]

    @classmethod
    def initialize(
        cls,
        input_dim: int,
        hidden: int = HIDDEN_UNITS,
        subset: PointSubset = PointSubset.POSE_BODY,
        norm_mode: NormalizationMode = NormalizationMode.PER_SEQUENCE,
        seed: int = 0,
    ) -> "LstmClassifier":
        """Seeded uniform init in +-1/sqrt(hidden); forget-gate bias starts at 1."""
        rng = np.random.default_rng(seed)
        lim = 1.0 / math.sqrt(hidden)

        def u(*shape):
            return rng.uniform(-lim, lim, shape).astype(np.float32)

        b = u(4 * hidden)
        b[hidden:2 * hidden] = 1.0
        return cls(u(4 * hidden, input_dim), u(4 * hidden, hidden), b, u(2, hidden), u(2),
                   subset=subset, norm_mode=norm_mode)

    def param_arrays(self) -> tuple[np.ndarray, ...]:
        return (self.w_x, self.w_h, self.b, self.w_proj, self.b_proj)

    def astype(self, dtype) -> "LstmClassifier":
        return replace(self, w_x=self.w_x.astype(dtype), w_h=self.w_h.astype(dtype),
                       b=self.b.astype(dtype), w_proj=self.w_proj.astype(dtype),
                       b_proj=self.b_proj.astype(dtype))


@dataclass
class LinearClassifier:
    """Fixed-context logistic scorer over the flattened last-W feature rows.

    ``weights[k]`` multiplies the feature row at context offset k, oldest
    first; there is no bias term, so the decision threshold is a zero logit.
    """

    weights: np.ndarray  # (W, 25)
    norm_mode: NormalizationMode = NormalizationMode.PER_SEQUENCE

    def __post_init__(self):
        if self.weights.ndim != 2 or self.weights.shape[1] != LINEAR_POINTS:
            raise DimensionMismatch(f"linear weights must be (W, {LINEAR_POINTS}), got {self.weights.shape}")

    @property
    def window(self) -> int:
        return self.weights.shape[0]

    @property
    def input_dim(self) -> int:
        return self.weights.shape[1]

    @property
    def subset(self) -> PointSubset:
        return PointSubset.POSE_BODY

    @classmethod
    def initialize(cls, window: int, seed: int = 0,
                   norm_mode: NormalizationMode = NormalizationMode.PER_SEQUENCE) -> "LinearClassifier":
        rng = np.random.default_rng(seed)
        w = rng.uniform(-0.1, 0.1, (window, LINEAR_POINTS)).astype(np.float32)
        return cls(w, norm_mode=norm_mode)

    def param_arrays(self) -> tuple[np.ndarray, ...]:
        return (self.weights,)

    def astype(self, dtype) -> "LinearClassifier":
        return replace(self, weights=self.weights.astype(dtype))


def param_count(model) -> int:
    """Exact number of scalar parameters of a classifier."""
    return int(sum(a.size for a in model.param_arrays()))


def _cell(model: LstmClassifier, h: np.ndarray, c: np.ndarray, x: np.ndarray):
    """One LSTM cell update; returns the internals needed for backprop."""
    hidden = model.hidden_dim
    pre = model.w_x @ x + model.w_h @ h + model.b
    i = _sigmoid(pre[:hidden])
    f = _sigmoid(pre[hidden:2 * hidden])
    g = np.tanh(pre[2 * hidden:3 * hidden])
    o = _sigmoid(pre[3 * hidden:])
    c_new = f * c + i * g
    tc = np.tanh(c_new)
    return o * tc, c_new, i, f, g, o, tc


def lstm_step(model: LstmClassifier, state: LstmState, x: np.ndarray) -> tuple[LstmState, np.ndarray]:
    """Advance the LSTM by one frame and project to 2-way logits."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.input_dim,):
        raise DimensionMismatch(f"expected input of shape ({model.input_dim},), got {x.shape}")
    if state.h.shape != (model.hidden_dim,) or state.c.shape != (model.hidden_dim,):
        raise DimensionMismatch("state does not match the model's hidden size")
    h, c, *_ = _cell(model, state.h, state.c, x)
    logits = model.w_proj @ h + model.b_proj
    return LstmState(h, c), logits


def forward_sequence(model: LstmClassifier, features: np.ndarray) -> np.ndarray:
    """(T, 2) logits from a zero state; row t depends only on rows <= t."""
    feats = np.asarray(features, dtype=np.float64)
    if feats.ndim != 2 or feats.shape[1] != model.input_dim:
        raise DimensionMismatch(f"expected features (T, {model.input_dim}), got {feats.shape}")
    count = feats.shape[0]
    logits = np.empty((count, 2))
    h = np.zeros(model.hidden_dim)
    c = np.zeros(model.hidden_dim)
    for t in range(count):
        h, c, *_ = _cell(model, h, c, feats[t])
        logits[t] = model.w_proj @ h + model.b_proj
    return logits


def linear_logit(model: LinearClassifier, window: np.ndarray) -> float:
    """Score one context window (most recent W feature rows, oldest first)."""
    win = np.asarray(window, dtype=np.float64)
    if win.shape != (model.window, model.input_dim):
        raise DimensionMismatch(f"expected window {(model.window, model.input_dim)}, got {win.shape}")
    return float(np.vdot(np.asarray(model.weights, dtype=np.float64), win))


def linear_forward(model: LinearClassifier, features: np.ndarray) -> np.ndarray:
    """(T,) logits of every frame, with the left context zero-padded."""
    feats = np.asarray(features, dtype=np.float64)
    if feats.ndim != 2 or feats.shape[1] != model.input_dim:
        raise DimensionMismatch(f"expected features (T, {model.input_dim}), got {feats.shape}")
    count = feats.shape[0]
    w = model.weights.astype(np.float64)
    padded = np.vstack([np.zeros((model.window - 1, model.input_dim)), feats])
    logits = np.zeros(count)
    for k in range(model.window):
        logits += padded[k:k + count] @ w[k]
    return logits


def predict(logits: np.ndarray) -> tuple[int, float]:
    """Arg-max label (ties break to not-signing) and the signing probability."""
    z = np.asarray(logits, dtype=np.float64)
    if z.shape != (2,):
        raise DimensionMismatch(f"expected 2 logits, got shape {z.shape}")
    label = int(z[1] > z[0])
    e = np.exp(z - z.max())
    return label, float(e[1] / (e[0] + e[1]))


def _lstm_payload_size(input_dim: int, hidden: int) -> int:
    return 4 * hidden * (input_dim + hidden + 1) + 2 * hidden + 2


def save(model, destination) -> None:
    """Write a classifier to the binary model format (magic ``SGNS``).

    Layout, little-endian: magic, version u16, kind u8, subset u8,
    normalization u8, two u32 dims (D and H, or D and W), then every
    parameter array in declaration order as float32.
    """
    for a in model.param_arrays():
        if not np.isfinite(a).all():
            raise ValueError("refusing to save non-finite parameters")
    if isinstance(model, LstmClassifier):
        kind, dims = _KIND_LSTM, (model.input_dim, model.hidden_dim)
    elif isinstance(model, LinearClassifier):
        kind, dims = _KIND_LINEAR, (model.input_dim, model.window)
    else:
        raise TypeError(f"cannot save object of type {type(model).__name__}")
    blob = bytearray()
    blob += struct.pack("<4sHBBB", MODEL_MAGIC, MODEL_FORMAT_VERSION, kind,
                        _SUBSET_CODES[model.subset], _NORM_CODES[model.norm_mode])
    blob += struct.pack("<II", *dims)
    for a in model.param_arrays():
        blob += np.ascontiguousarray(a, dtype="<f4").tobytes()
    Path(destination).write_bytes(bytes(blob))


def load(source):
    """Read a classifier back; inverse of ``save``, bit-exact on parameters."""
    data = Path(source).read_bytes()
    if len(data) < 4 or data[:4] != MODEL_MAGIC:
        raise CorruptModelFile("bad magic bytes", offset=0)
    if len(data) < 9:
        raise CorruptModelFile("truncated header", offset=len(data))
    version, kind, subset_code, norm_code = struct.unpack_from("<HBBB", data, 4)
    if version != MODEL_FORMAT_VERSION:
        raise CorruptModelFile(f"unsupported format version {version}", offset=4)
    if kind not in (_KIND_LSTM, _KIND_LINEAR):
        raise CorruptModelFile(f"unknown model kind {kind}", offset=6)
    if subset_code not in _SUBSETS_BY_CODE:
        raise CorruptModelFile(f"unknown point subset code {subset_code}", offset=7)
    if norm_code not in _NORMS_BY_CODE:
        raise CorruptModelFile(f"unknown normalization code {norm_code}", offset=8)
    if len(data) < 17:
        raise CorruptModelFile("truncated dimension header", offset=len(data))
    dim_a, dim_b = struct.unpack_from("<II", data, 9)
    if dim_a < 1 or dim_b < 1:
        raise CorruptModelFile(f"non-positive dimensions {dim_a}x{dim_b}", offset=9)
    subset = _SUBSETS_BY_CODE[subset_code]
    norm_mode = _NORMS_BY_CODE[norm_code]

    if kind == _KIND_LSTM:
        n_params = _lstm_payload_size(dim_a, dim_b)
    else:
        n_params = dim_a * dim_b
    expected = 17 + 4 * n_params
    if len(data) != expected:
        raise CorruptModelFile(
            f"payload length {len(data) - 17} bytes does not match declared dimensions "
            f"(expected {4 * n_params})", offset=min(len(data), expected))

    offset = 17

    def take(count, shape):
        nonlocal offset
        arr = np.frombuffer(data, dtype="<f4", count=count, offset=offset).reshape(shape).copy()
        offset += 4 * count
        return arr

    if kind == _KIND_LSTM:
        d, hidden = dim_a, dim_b
        return LstmClassifier(
            take(4 * hidden * d, (4 * hidden, d)),
            take(4 * hidden * hidden, (4 * hidden, hidden)),
            take(4 * hidden, (4 * hidden,)),
            take(2 * hidden, (2, hidden)),
            take(2, (2,)),
            subset=subset, norm_mode=norm_mode)
    d, window = dim_a, dim_b
    if d != LINEAR_POINTS:
        raise CorruptModelFile(f"linear model must have {LINEAR_POINTS} points, file declares {d}", offset=9)
    return LinearClassifier(take(window * d, (window, d)), norm_mode=norm_mode)
