"""Supervised training: per-frame NLL loss, truncated BPTT, Adam, early stopping.

Training keeps a float64 master copy of the parameters and evaluates the
dev metric on the float32 rounding that would actually be saved, so the
returned model's dev accuracy is exactly the best value in the history.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, EmptyCorpus, ShapeMismatch
from .models import (
    HIDDEN_UNITS, LINEAR_POINTS, LinearClassifier, LstmClassifier,
    _cell, _sigmoid, forward_sequence,
)
from .pose_features import PointSubset, video_id


@dataclass
class LabeledSequence:
    """Feature matrix with per-frame gold labels at a known frame rate."""

    features: np.ndarray  # (T, D)
    labels: np.ndarray    # (T,) in {0, 1}
    fps: float
    source_id: str = ""

    def __post_init__(self):
        self.features = np.asarray(self.features)
        self.labels = np.asarray(self.labels)
        if self.features.ndim != 2:
            raise ValueError(f"features must be 2-D, got shape {self.features.shape}")
        if self.labels.shape != (self.features.shape[0],):
            raise ValueError(f"{self.labels.shape[0] if self.labels.ndim else 0} labels "
                             f"for {self.features.shape[0]} frames")
        if self.labels.size and not np.isin(self.labels, (0, 1)).all():
            raise ValueError("labels must be binary")
        if not self.fps > 0:
            raise ValueError(f"fps must be positive, got {self.fps}")

    def __len__(self) -> int:
        return self.features.shape[0]


@dataclass
class TrainConfig:
    learning_rate: float = 1e-3
    epochs: int = 50
    chunk_len: int = 500
    patience: int = 5
    seed: int = 42
    subset: PointSubset = PointSubset.POSE_BODY

    def __post_init__(self):
        if self.learning_rate <= 0 or self.epochs <= 0 or self.chunk_len <= 0 or self.patience <= 0:
            raise ValueError("learning rate, epochs, chunk length and patience must be positive")


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    dev_accuracy: float


@dataclass
class LstmGradients:
    w_x: np.ndarray
    w_h: np.ndarray
    b: np.ndarray
    w_proj: np.ndarray
    b_proj: np.ndarray

    def arrays(self) -> tuple[np.ndarray, ...]:
        return (self.w_x, self.w_h, self.b, self.w_proj, self.b_proj)


def _softmax_rows(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def nll_loss(logits: np.ndarray, labels) -> float:
    """Mean per-frame negative log-likelihood of the gold classes."""
    z = np.asarray(logits, dtype=np.float64)
    y = np.asarray(labels)
    if z.ndim != 2 or z.shape[1] != 2:
        raise ShapeMismatch(f"logits must be (T, 2), got {z.shape}")
    if y.shape != (z.shape[0],):
        raise ShapeMismatch(f"labels shape {y.shape} does not match {z.shape[0]} frames")
    if z.shape[0] == 0:
        return 0.0
    if not np.isin(y, (0, 1)).all():
        raise ValueError("labels must be binary")
    m = z.max(axis=1)
    lse = m + np.log(np.exp(z[:, 0] - m) + np.exp(z[:, 1] - m))
    return float(np.mean(lse - z[np.arange(z.shape[0]), y]))


def _backward_core(model: LstmClassifier, feats: np.ndarray, labels: np.ndarray,
                   h0: np.ndarray, c0: np.ndarray):
    """Loss, exact gradients, and the final state for one BPTT chunk."""
    count = feats.shape[0]
    hidden = model.hidden_dim
    w_proj = np.asarray(model.w_proj, dtype=np.float64)
    w_h = np.asarray(model.w_h, dtype=np.float64)

    gi = np.empty((count, hidden)); gf = np.empty((count, hidden))
    gg = np.empty((count, hidden)); go = np.empty((count, hidden))
    cs = np.empty((count, hidden)); tc = np.empty((count, hidden))
    hs = np.empty((count, hidden))
    h, c = h0, c0
    for t in range(count):
        h, c, i_, f_, g_, o_, tc_ = _cell(model, h, c, feats[t])
        gi[t] = i_; gf[t] = f_; gg[t] = g_; go[t] = o_
        cs[t] = c; tc[t] = tc_; hs[t] = h

    logits = hs @ w_proj.T + np.asarray(model.b_proj, dtype=np.float64)
    loss = nll_loss(logits, labels)

    d_logits = _softmax_rows(logits)
    d_logits[np.arange(count), labels] -= 1.0
    d_logits /= count

    h_prev = np.vstack([h0[None, :], hs[:-1]])
    dh_direct = d_logits @ w_proj
    d_pre = np.empty((count, 4 * hidden))
    dh_next = np.zeros(hidden)
    dc_next = np.zeros(hidden)
    for t in range(count - 1, -1, -1):
        dh = dh_direct[t] + dh_next
        dc = dc_next + dh * go[t] * (1.0 - tc[t] * tc[t])
        c_prev = cs[t - 1] if t > 0 else c0
        d_pre[t, :hidden] = dc * gg[t] * gi[t] * (1.0 - gi[t])
        d_pre[t, hidden:2 * hidden] = dc * c_prev * gf[t] * (1.0 - gf[t])
        d_pre[t, 2 * hidden:3 * hidden] = dc * gi[t] * (1.0 - gg[t] * gg[t])
        d_pre[t, 3 * hidden:] = dh * tc[t] * go[t] * (1.0 - go[t])
        dh_next = w_h.T @ d_pre[t]
        dc_next = dc * gf[t]

    grads = LstmGradients(
        w_x=d_pre.T @ feats,
        w_h=d_pre.T @ h_prev,
        b=d_pre.sum(axis=0),
        w_proj=d_logits.T @ hs,
        b_proj=d_logits.sum(axis=0),
    )
    return loss, grads, h, c


def backward(model: LstmClassifier, features: np.ndarray, labels) -> LstmGradients:
    """Exact gradients of the mean NLL over a full sequence, from a zero state."""
    feats = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels)
    if feats.ndim != 2 or feats.shape[1] != model.input_dim:
        raise ShapeMismatch(f"expected features (T, {model.input_dim}), got {feats.shape}")
    if y.shape != (feats.shape[0],):
        raise ShapeMismatch(f"labels shape {y.shape} does not match {feats.shape[0]} frames")
    if feats.shape[0] == 0:
        hidden = model.hidden_dim
        return LstmGradients(np.zeros_like(model.w_x, dtype=np.float64),
                             np.zeros_like(model.w_h, dtype=np.float64),
                             np.zeros(4 * hidden), np.zeros((2, hidden)), np.zeros(2))
    work = model if model.w_x.dtype == np.float64 else model.astype(np.float64)
    _, grads, _, _ = _backward_core(work, feats, y, np.zeros(model.hidden_dim), np.zeros(model.hidden_dim))
    return grads


class _Adam:
    """Adam update rule with the standard moment constants."""

    def __init__(self, arrays: Sequence[np.ndarray], lr: float,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(a) for a in arrays]
        self.v = [np.zeros_like(a) for a in arrays]

    def step(self, arrays: Sequence[np.ndarray], grads: Sequence[np.ndarray]) -> None:
        self.t += 1
        correction1 = 1.0 - self.beta1 ** self.t
        correction2 = 1.0 - self.beta2 ** self.t
        for a, g, m, v in zip(arrays, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            a -= self.lr * (m / correction1) / (np.sqrt(v / correction2) + self.eps)


def _predicted_labels(logits: np.ndarray) -> np.ndarray:
    return (logits[:, 1] > logits[:, 0]).astype(np.uint8)


def _corpus_accuracy(model: LstmClassifier, corpus: list[LabeledSequence]) -> float:
    hits = 0
    total = 0
    for seq in corpus:
        pred = _predicted_labels(forward_sequence(model, seq.features))
        hits += int((pred == seq.labels).sum())
        total += len(seq)
    return hits / total


def _chunks(length: int, chunk_len: int):
    for start in range(0, length, chunk_len):
        yield start, min(start + chunk_len, length)


def train(corpus: list[LabeledSequence], cfg: TrainConfig,
          dev: list[LabeledSequence] | None = None) -> tuple[LstmClassifier, list[EpochRecord]]:
    """Train the LSTM classifier with truncated BPTT and dev-accuracy early stopping.

    Sequences are visited in a seed-shuffled order each epoch; within a
    sequence the hidden state is carried across chunks while gradients stop at
    chunk boundaries.  ``dev`` defaults to the training corpus itself.
    """
    if not corpus:
        raise EmptyCorpus("cannot train on an empty corpus")
    dim = corpus[0].features.shape[1]
    for seq in corpus:
        if seq.features.shape[1] != dim:
            raise DimensionMismatch(f"sequence {seq.source_id!r} has {seq.features.shape[1]} "
                                    f"features, expected {dim}")
    dev_corpus = list(dev) if dev is not None else list(corpus)

    rng = np.random.default_rng(cfg.seed)
    master = LstmClassifier.initialize(dim, HIDDEN_UNITS, subset=cfg.subset,
                                       seed=cfg.seed).astype(np.float64)
    optimizer = _Adam(master.param_arrays(), cfg.learning_rate)

    history: list[EpochRecord] = []
    best_acc = -1.0
    best_model: LstmClassifier | None = None
    stale = 0
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(len(corpus))
        loss_sum = 0.0
        frames = 0
        for idx in order:
            seq = corpus[idx]
            feats = np.asarray(seq.features, dtype=np.float64)
            labels = np.asarray(seq.labels, dtype=np.int64)
            h = np.zeros(HIDDEN_UNITS)
            c = np.zeros(HIDDEN_UNITS)
            for start, end in _chunks(len(seq), cfg.chunk_len):
                loss, grads, h, c = _backward_core(master, feats[start:end], labels[start:end], h, c)
                optimizer.step(master.param_arrays(), grads.arrays())
                loss_sum += loss * (end - start)
                frames += end - start
        candidate = master.astype(np.float32)
        acc = _corpus_accuracy(candidate, dev_corpus)
        history.append(EpochRecord(epoch, loss_sum / frames, acc))
        if acc > best_acc:
            best_acc = acc
            best_model = candidate
            stale = 0
        else:
            stale += 1
            if stale >= cfg.patience:
                break
    assert best_model is not None
    return best_model, history


def train_linear(corpus: list[LabeledSequence], window: int, *,
                 learning_rate: float = 0.1, epochs: int = 200,
                 seed: int = 42) -> LinearClassifier:
    """Fit a fixed-context linear baseline by full-batch logistic Adam.

    The seed is accepted for interface symmetry; the full-batch objective
    makes the fit deterministic regardless.
    """
    if not corpus:
        raise EmptyCorpus("cannot train on an empty corpus")
    if window < 1:
        raise ValueError(f"window must be positive, got {window}")
    for seq in corpus:
        if seq.features.shape[1] != LINEAR_POINTS:
            raise DimensionMismatch(f"linear baselines need {LINEAR_POINTS} feature columns, "
                                    f"sequence {seq.source_id!r} has {seq.features.shape[1]}")
    del seed

    views = []
    total = 0
    for seq in corpus:
        feats = np.asarray(seq.features, dtype=np.float64)
        padded = np.vstack([np.zeros((window - 1, LINEAR_POINTS)), feats])
        windows = np.lib.stride_tricks.sliding_window_view(padded, (window, LINEAR_POINTS))
        views.append((windows[:, 0], np.asarray(seq.labels, dtype=np.float64)))
        total += len(seq)

    weights = np.zeros((window, LINEAR_POINTS))
    optimizer = _Adam([weights], learning_rate)
    for _ in range(epochs):
        grad = np.zeros_like(weights)
        for windows, labels in views:
            z = np.einsum("twd,wd->t", windows, weights)
            push = _sigmoid(z) - labels
            grad += np.einsum("t,twd->wd", push, windows)
        optimizer.step([weights], [grad / total])
    return LinearClassifier(weights.astype(np.float32))


def split_corpus(sequences: list) -> tuple[list, list, list]:
    """Deterministic 50:25:25 split keyed on the video part of each source id.

    Videos are ordered by a stable hash and cut by count, so both signers of
    one video always share a split and the proportions hold to within one
    video.
    """
    if not sequences:
        raise EmptyCorpus("cannot split an empty corpus")
    videos = []
    seen = set()
    for seq in sequences:
        vid = video_id(seq.source_id)
        if vid not in seen:
            seen.add(vid)
            videos.append(vid)
    ordered = sorted(videos, key=lambda v: (hashlib.md5(v.encode()).hexdigest(), v))
    n = len(ordered)
    n_train = (n + 1) // 2
    n_dev = (n - n_train + 1) // 2
    bucket = {}
    for rank, vid in enumerate(ordered):
        bucket[vid] = 0 if rank < n_train else (1 if rank < n_train + n_dev else 2)
    parts: tuple[list, list, list] = ([], [], [])
    for seq in sequences:
        parts[bucket[video_id(seq.source_id)]].append(seq)
    return parts
