"""Windowed softmax linear classifier with input dropout.

The frame classifier is a single linear layer over the concatenated
features of a (2r+1)-frame window centered on each frame (edges
replicated), trained by mini-batch gradient descent on the sparse
labeled frames only. Dropout on the input vector, kept active at
inference, provides the stochastic forward passes used for Monte Carlo
uncertainty estimates; one mask is drawn per pass and shared across all
frames so each pass corresponds to one parameter draw.
"""

from __future__ import annotations

import json
import struct
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .dataset import VideoRecord
from .seeding import derive_seed

CKPT_MAGIC = b"BACTMODL"
CKPT_VERSION = 1


@dataclass(frozen=True)
class PredictorConfig:
    context_radius: int = 7
    dropout: float = 0.2
    mc_passes: int = 10
    lr: float = 1e-2
    epochs: int = 85
    batch_size: int = 256
    weight_decay: float = 1e-5
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must lie in [0, 1)")
        if self.mc_passes < 1:
            raise ValueError("mc_passes must be >= 1")
        if self.context_radius < 0:
            raise ValueError("context_radius must be >= 0")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")
        if self.lr <= 0:
            raise ValueError("lr must be positive")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be >= 0")


@dataclass(frozen=True)
class ModelState:
    """Trained weights ((2r+1)*D+1) x C, loss trace, and the config used."""

    weights: np.ndarray
    loss_trace: tuple
    config: PredictorConfig
    num_classes: int
    feature_dim: int

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if not np.all(np.isfinite(w)):
            raise ValueError("non-finite model weights")
        expected = (2 * self.config.context_radius + 1) * self.feature_dim + 1
        if w.shape != (expected, self.num_classes):
            raise ValueError(f"weight shape {w.shape} != ({expected}, {self.num_classes})")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "loss_trace", tuple(float(x) for x in self.loss_trace))


@dataclass(frozen=True)
class FrameProbs:
    """Per-frame class probabilities for one video, rows on the simplex."""

    video_id: str
    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=np.float64)
        if p.ndim != 2:
            raise ValueError("probs must be T x C")
        if p.min() < 0.0 or p.max() > 1.0 + 1e-9:
            raise ValueError("probabilities outside [0, 1]")
        if np.abs(p.sum(axis=1) - 1.0).max() > 1e-6:
            raise ValueError("probability rows must sum to 1")
        object.__setattr__(self, "probs", p)

    @property
    def T(self) -> int:
        return self.probs.shape[0]

    @property
    def C(self) -> int:
        return self.probs.shape[1]


def window_features(video: VideoRecord, r: int) -> np.ndarray:
    """T x ((2r+1)*D+1) design matrix: replicated-edge windows plus a bias 1."""
    feats = video.features.astype(np.float64)
    T = feats.shape[0]
    idx = np.arange(T)[:, None] + np.arange(-r, r + 1)[None, :]
    np.clip(idx, 0, T - 1, out=idx)
    windows = feats[idx].reshape(T, -1)
    return np.hstack([windows, np.ones((T, 1))])


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def loss_and_grad(W, X, y, weight_decay):
    """Mean cross-entropy over the batch plus L2 penalty on non-bias rows.

    Returns (loss, dloss/dW); the analytic gradient here is what the
    finite-difference check in the tests validates.
    """
    n = X.shape[0]
    probs = softmax(X @ W)
    nll = -np.log(np.maximum(probs[np.arange(n), y], 1e-300))
    loss = float(nll.mean()) + 0.5 * weight_decay * float((W[:-1] ** 2).sum())
    delta = probs
    delta[np.arange(n), y] -= 1.0
    grad = X.T @ delta / n
    grad[:-1] += weight_decay * W[:-1]
    return loss, grad


def _dropout_mask(rng, shape, p):
    """Inverted dropout: zero with probability p, survivors scaled by 1/(1-p)."""
    if p == 0.0:
        return np.ones(shape)
    return (rng.random(shape) >= p) / (1.0 - p)


def train(
    ds,
    labeled: Iterable[tuple],
    cfg: PredictorConfig,
) -> ModelState:
    """Fit the classifier on (video id, 1-based frame, class id) triples."""
    triples = sorted(labeled)
    if not triples:
        raise ValueError("cannot train on an empty labeled set")

    per_video = {}
    for vid, frame, label in triples:
        per_video.setdefault(vid, []).append((frame, label))

    r = cfg.context_radius
    X_rows, y_rows = [], []
    num_classes = ds.num_classes
    feature_dim = None
    for vid, items in per_video.items():
        video = ds.video(vid)
        feature_dim = video.D
        design = window_features(video, r)
        for frame, label in items:
            if not 1 <= frame <= video.T:
                raise IndexError(f"frame {frame} out of range for video {vid!r} (T={video.T})")
            if not 0 <= label < num_classes:
                raise ValueError(f"label {label} out of range for {num_classes} classes")
            X_rows.append(design[frame - 1])
            y_rows.append(label)

    X = np.array(X_rows)
    y = np.array(y_rows, dtype=np.int64)
    n, F = X.shape
    W = np.zeros((F, num_classes))
    rng = np.random.default_rng(derive_seed("train", cfg.seed))

    trace = []
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            Xb = X[idx]
            if cfg.dropout > 0.0:
                mask = _dropout_mask(rng, (len(idx), F - 1), cfg.dropout)
                Xb = Xb.copy()
                Xb[:, :-1] *= mask
            loss, grad = loss_and_grad(W, Xb, y[idx], cfg.weight_decay)
            W -= cfg.lr * grad
            total += loss * len(idx)
        trace.append(total / n)

    return ModelState(
        weights=W,
        loss_trace=tuple(trace),
        config=cfg,
        num_classes=num_classes,
        feature_dim=feature_dim,
    )


def _forward(m: ModelState, video: VideoRecord, mask=None) -> np.ndarray:
    if video.D != m.feature_dim:
        raise ValueError(f"feature dim {video.D} != model dim {m.feature_dim}")
    X = window_features(video, m.config.context_radius)
    if mask is not None:
        X = X.copy()
        X[:, :-1] *= mask
    return softmax(X @ m.weights)


def predict_probs(m: ModelState, video: VideoRecord) -> FrameProbs:
    """Deterministic forward pass with dropout disabled."""
    return FrameProbs(video.id, _forward(m, video))


def mc_sample(m: ModelState, video: VideoRecord, S: int, seed: int) -> list:
    """S stochastic forward passes, one shared dropout mask per pass."""
    if S < 1:
        raise ValueError("S must be >= 1")
    rng = np.random.default_rng(derive_seed("mc", seed, video.id))
    F = (2 * m.config.context_radius + 1) * m.feature_dim
    out = []
    for _ in range(S):
        mask = _dropout_mask(rng, F, m.config.dropout)
        out.append(FrameProbs(video.id, _forward(m, video, mask=mask)))
    return out


def mean_probs(samples: Sequence[FrameProbs]) -> FrameProbs:
    """Elementwise arithmetic mean of the sampled distributions."""
    if not samples:
        raise ValueError("mean_probs needs at least one sample")
    shapes = {s.probs.shape for s in samples}
    if len(shapes) != 1:
        raise ValueError(f"sample shape mismatch: {sorted(shapes)}")
    stacked = np.stack([s.probs for s in samples])
    return FrameProbs(samples[0].video_id, stacked.mean(axis=0))


def save_checkpoint(m: ModelState, path) -> None:
    """Binary checkpoint: magic, version, config JSON, then row-major weights."""
    meta = {
        "config": asdict(m.config),
        "num_classes": m.num_classes,
        "feature_dim": m.feature_dim,
        "loss_trace": list(m.loss_trace),
    }
    blob = json.dumps(meta, sort_keys=True).encode("utf-8")
    rows, cols = m.weights.shape
    with open(path, "wb") as fh:
        fh.write(CKPT_MAGIC)
        fh.write(struct.pack("<III", CKPT_VERSION, len(blob), 0))
        fh.write(blob)
        fh.write(struct.pack("<II", rows, cols))
        fh.write(np.ascontiguousarray(m.weights, dtype=np.float64).tobytes())


def load_checkpoint(path) -> ModelState:
    data = Path(path).read_bytes()
    if data[:8] != CKPT_MAGIC:
        raise ValueError(f"{path}: not a model checkpoint")
    version, blob_len, _ = struct.unpack("<III", data[8:20])
    if version != CKPT_VERSION:
        raise ValueError(f"{path}: unsupported checkpoint version {version}")
    meta = json.loads(data[20 : 20 + blob_len].decode("utf-8"))
    off = 20 + blob_len
    rows, cols = struct.unpack("<II", data[off : off + 8])
    W = np.frombuffer(data[off + 8 : off + 8 + rows * cols * 8], dtype="<f8")
    return ModelState(
        weights=W.reshape(rows, cols).copy(),
        loss_trace=tuple(meta["loss_trace"]),
        config=PredictorConfig(**meta["config"]),
        num_classes=meta["num_classes"],
        feature_dim=meta["feature_dim"],
    )
