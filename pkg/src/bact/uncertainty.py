"""Frame-level acquisition scores from MC samples and video ranking.

All entropies are in nats. The stochastic power variant perturbs
log-scores with Gumbel noise drawn from a stream derived per frame, so
its output is reproducible and independent of sample ordering.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .predictor import FrameProbs
from .seeding import derive_seed

ACQUISITION_FNS = ("entropy", "bald", "power_bald", "jsd", "variation_ratio")
LOG_EPS = 1e-12


@dataclass(frozen=True)
class VideoScore:
    video_id: str
    U: float

    def __post_init__(self):
        if not np.isfinite(self.U):
            raise ValueError(f"video {self.video_id!r}: non-finite score")


def _entropy_rows(p: np.ndarray) -> np.ndarray:
    """Shannon entropy per row with the 0*log0 := 0 convention."""
    terms = np.where(p > 0.0, p * np.log(np.maximum(p, LOG_EPS)), 0.0)
    return -terms.sum(axis=-1)


def predictive_entropy(row) -> float:
    row = np.asarray(row, dtype=np.float64)
    if row.ndim != 1:
        raise ValueError("expected a single probability row")
    if abs(row.sum() - 1.0) > 1e-6 or row.min() < -1e-12:
        raise ValueError("row is not a normalized distribution")
    return float(_entropy_rows(row))


def _stack(samples: Sequence[FrameProbs]) -> np.ndarray:
    if not samples:
        raise ValueError("no MC samples given")
    shapes = {s.probs.shape for s in samples}
    if len(shapes) != 1:
        raise ValueError(f"sample shape mismatch: {sorted(shapes)}")
    return np.stack([s.probs for s in samples])


def _pairwise_jsd(stacked: np.ndarray) -> np.ndarray:
    """Mean over sample pairs of the Jensen-Shannon divergence, base e."""
    S = stacked.shape[0]
    if S < 2:
        return np.zeros(stacked.shape[1])
    logp = np.log(np.maximum(stacked, LOG_EPS))
    total = np.zeros(stacked.shape[1])
    for i in range(S):
        for j in range(i + 1, S):
            m = 0.5 * (stacked[i] + stacked[j])
            logm = np.log(np.maximum(m, LOG_EPS))
            kl_i = (stacked[i] * (logp[i] - logm)).sum(axis=-1)
            kl_j = (stacked[j] * (logp[j] - logm)).sum(axis=-1)
            total += 0.5 * (kl_i + kl_j)
    return total / (S * (S - 1) / 2)


def frame_uncertainties(
    samples: Sequence[FrameProbs],
    fn: str = "entropy",
    seed: int = 0,
    power_beta: float = 1.0,
) -> np.ndarray:
    """Per-frame acquisition scores from S stochastic forward passes."""
    if fn not in ACQUISITION_FNS:
        raise ValueError(f"unknown acquisition fn {fn!r}; choose from {ACQUISITION_FNS}")
    stacked = _stack(samples)
    S = stacked.shape[0]
    mean = stacked.mean(axis=0)

    if fn == "entropy":
        return _entropy_rows(mean)
    if fn == "bald":
        return _entropy_rows(mean) - _entropy_rows(stacked).mean(axis=0)
    if fn == "power_bald":
        if power_beta <= 0:
            raise ValueError("power_beta must be positive")
        bald = _entropy_rows(mean) - _entropy_rows(stacked).mean(axis=0)
        vid = samples[0].video_id
        gumbel = np.empty(len(bald))
        for t in range(len(bald)):
            u = np.random.default_rng(derive_seed("power_bald", seed, vid, t)).random()
            gumbel[t] = -np.log(-np.log(max(u, LOG_EPS)))
        return np.log(np.maximum(bald, 0.0) + LOG_EPS) + gumbel / power_beta
    if fn == "jsd":
        return _pairwise_jsd(stacked)
    # variation_ratio: disagreement with the modal predicted class
    votes = stacked.argmax(axis=-1)
    modal = (votes[None, :, :] == np.arange(stacked.shape[-1])[:, None, None]).sum(axis=1)
    return 1.0 - modal.max(axis=0) / S


def video_score(u) -> float:
    """Mean-pooled frame uncertainty, the video-level informativeness U."""
    u = np.asarray(u, dtype=np.float64)
    if u.size == 0:
        raise ValueError("cannot pool an empty uncertainty vector")
    return float(u.mean())


def select_videos(scores: Sequence[VideoScore], n_query: int) -> set:
    """Ids of the n_query highest-scoring videos; ties go to smaller id."""
    if n_query < 1:
        raise ValueError("n_query must be >= 1")
    if not scores:
        raise ValueError("empty candidate pool")
    ranked = sorted(scores, key=lambda s: (-s.U, s.video_id))
    return {s.video_id for s in ranked[: min(n_query, len(ranked))]}
