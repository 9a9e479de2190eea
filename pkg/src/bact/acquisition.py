"""Boundary-centric clip selection and the baseline clip selectors.

Candidate boundaries are frames where the predicted label changes.
Each is scored by a convex combination of local uncertainty, inverted
top-1/top-2 confidence gap, and mean adjacent-frame distributional
change inside a symmetric window; the top K per video become clip
queries whose single center frame gets labeled.

Frame indices are 1-based throughout, matching the dataset module.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .dataset import VideoRecord
from .predictor import FrameProbs
from .seeding import spawn_rng

BASELINE_STRATEGIES = ("random", "entropy", "equidistant", "split_random", "split_entropy")


@dataclass(frozen=True)
class ScoreWeights:
    """Mixing weights (alpha, beta, gamma); normalized to sum to 1."""

    alpha: float = 0.2
    beta: float = 0.3
    gamma: float = 0.5

    def __post_init__(self):
        vals = (self.alpha, self.beta, self.gamma)
        if any(v < 0 for v in vals):
            raise ValueError("weights must be non-negative")
        total = sum(vals)
        if total <= 0:
            raise ValueError("at least one weight must be positive")
        if abs(total - 1.0) > 1e-9:
            object.__setattr__(self, "alpha", self.alpha / total)
            object.__setattr__(self, "beta", self.beta / total)
            object.__setattr__(self, "gamma", self.gamma / total)


@dataclass(frozen=True)
class BoundaryCandidate:
    """A predicted label change at frame b with its score components."""

    video_id: str
    b: int
    u_local: float
    gap: float
    grad: float
    fused: float
    degenerate_window: bool = False  # window too short for a gradient pair

    def __post_init__(self):
        if self.b < 2:
            raise ValueError("a boundary needs a predecessor frame, so b >= 2")
        if not 0.0 <= self.gap <= 1.0 + 1e-9:
            raise ValueError("confidence gap must lie in [0, 1]")


@dataclass(frozen=True)
class ClipQuery:
    """A clip interval [lo, hi] around center b; only frame b gets labeled."""

    video_id: str
    center: int
    lo: int
    hi: int

    def __post_init__(self):
        if not (1 <= self.lo <= self.center <= self.hi):
            raise ValueError(f"bad clip interval [{self.lo},{self.hi}] around {self.center}")

    @property
    def frame(self) -> int:
        """The single frame index submitted for labeling."""
        return self.center

    def to_dict(self) -> dict:
        return {"video": self.video_id, "center": self.center, "lo": self.lo, "hi": self.hi}


def detect_boundaries(pred_labels) -> list:
    """1-based frames t in [2, T] whose label differs from frame t-1."""
    labels = np.asarray(pred_labels)
    if labels.ndim != 1 or labels.size == 0:
        raise ValueError("pred_labels must be a non-empty sequence")
    return [int(t) for t in np.flatnonzero(labels[1:] != labels[:-1]) + 2]


def boundary_window(b: int, w: int, T: int) -> tuple:
    """Symmetric window [b-w, b+w] clamped to [1, T]."""
    if not 1 <= b <= T:
        raise ValueError(f"boundary {b} outside [1, {T}]")
    if w < 0:
        raise ValueError("window half-width must be >= 0")
    return (max(1, b - w), min(T, b + w))


def clip_interval(b: int, clip_len: int, T: int) -> tuple:
    """Clip of nominal length clip_len centered on b; 0 means bare frame."""
    return boundary_window(b, clip_len // 2, T)


def local_uncertainty(u, window) -> float:
    """Mean frame uncertainty over the window."""
    u = np.asarray(u, dtype=np.float64)
    lo, hi = window
    if not (1 <= lo <= hi <= u.shape[0]):
        raise ValueError(f"window [{lo},{hi}] outside [1, {u.shape[0]}]")
    return float(u[lo - 1 : hi].mean())


def confidence_gap(row) -> float:
    """Top-1 minus top-2 probability; small gaps mean ambiguous frames."""
    row = np.asarray(row, dtype=np.float64)
    if row.shape[0] < 2:
        raise ValueError("need at least two classes")
    if abs(row.sum() - 1.0) > 1e-6:
        raise ValueError("row is not a normalized distribution")
    top = np.sort(row)[-2:]
    return float(top[1] - top[0])


def temporal_gradient(probs: np.ndarray, window) -> float:
    """Mean L2 distance between adjacent distribution rows inside the window.

    A window with fewer than two frames has no adjacent pair; the
    gradient is defined as 0 there and callers flag the degeneracy.
    """
    p = np.asarray(probs, dtype=np.float64)
    lo, hi = window
    if not (1 <= lo <= hi <= p.shape[0]):
        raise ValueError(f"window [{lo},{hi}] outside [1, {p.shape[0]}]")
    if hi - lo < 1:
        return 0.0
    block = p[lo - 1 : hi]
    return float(np.linalg.norm(np.diff(block, axis=0), axis=1).mean())


def boundary_score(u_local: float, gap: float, grad: float, w: ScoreWeights) -> float:
    """alpha*u_local + beta*(1-gap) + gamma*grad."""
    return w.alpha * u_local + w.beta * (1.0 - gap) + w.gamma * grad


def score_boundaries(
    video_id: str,
    pred_labels,
    mean_probs: np.ndarray,
    u,
    clip_len: int,
    weights: ScoreWeights,
) -> list:
    """Score every detected boundary of one video.

    The scoring half-width is floor(clip_len/2); for bare-frame clips
    (clip_len 0) it falls back to 10 so the window statistics stay
    defined.
    """
    T = len(pred_labels)
    w = clip_len // 2 if clip_len // 2 >= 1 else 10
    out = []
    for b in detect_boundaries(pred_labels):
        win = boundary_window(b, w, T)
        u_loc = local_uncertainty(u, win)
        gap = confidence_gap(mean_probs[b - 1])
        grad = temporal_gradient(mean_probs, win)
        out.append(
            BoundaryCandidate(
                video_id=video_id,
                b=b,
                u_local=u_loc,
                gap=gap,
                grad=grad,
                fused=boundary_score(u_loc, gap, grad, weights),
                degenerate_window=win[1] - win[0] < 1,
            )
        )
    return out


def select_top_k_boundaries(
    cands: Sequence[BoundaryCandidate],
    K: int,
    clip_len: int,
    video_lengths: dict,
    min_separation: int = 0,
) -> list:
    """Highest-scoring candidates as clip queries, ties to smaller frame.

    With min_separation > 0, a candidate within that many frames of an
    already kept one in the same video is suppressed (descending-score
    non-max suppression).
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    ranked = sorted(cands, key=lambda c: (-c.fused, c.b, c.video_id))
    kept = []
    for cand in ranked:
        if len(kept) == K:
            break
        if min_separation > 0 and any(
            k.video_id == cand.video_id and abs(k.b - cand.b) < min_separation for k in kept
        ):
            continue
        kept.append(cand)
    return [
        ClipQuery(c.video_id, c.b, *clip_interval(c.b, clip_len, video_lengths[c.video_id]))
        for c in kept
    ]


def _partition_spans(T: int, parts: int = 4) -> list:
    """Contiguous 1-based spans of near-equal length covering [1, T]."""
    chunks = np.array_split(np.arange(1, T + 1), min(parts, T))
    return [(int(c[0]), int(c[-1])) for c in chunks if len(c)]


def baseline_select_clips(
    strategy: str,
    video: VideoRecord,
    probs: Optional[FrameProbs],
    u,
    K: int,
    clip_len: int,
    seed: int,
) -> list:
    """Non-boundary clip selectors used as comparison arms."""
    if strategy not in BASELINE_STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; choose from {BASELINE_STRATEGIES}")
    if K < 1:
        raise ValueError("K must be >= 1")
    T = video.T
    if K > T:
        warnings.warn(f"video {video.id!r}: K={K} > T={T}, clamping to T")
        K = T
    rng = spawn_rng("baseline", strategy, seed, video.id)

    if strategy == "random":
        centers = sorted(int(c) + 1 for c in rng.choice(T, size=K, replace=False))
    elif strategy == "entropy":
        u = np.asarray(u, dtype=np.float64)
        order = sorted(range(1, T + 1), key=lambda t: (-u[t - 1], t))
        centers = []
        for t in order:
            if len(centers) == K:
                break
            if clip_len > 0 and any(abs(t - c) < clip_len for c in centers):
                continue
            centers.append(t)
        for t in order:  # relax separation if suppression starved the quota
            if len(centers) == K:
                break
            if t not in centers:
                centers.append(t)
        centers.sort()
    elif strategy == "equidistant":
        centers = [max(1, int((i - 0.5) * T / K)) for i in range(1, K + 1)]
        seen = sorted(set(centers))
        if len(seen) < K:
            extra = (t for t in range(1, T + 1) if t not in set(seen))
            seen.extend(next(extra) for _ in range(K - len(seen)))
        centers = sorted(seen)
    else:
        spans = _partition_spans(T)
        picked = set()
        centers = []
        i = 0
        while len(centers) < K and len(picked) < T:
            lo, hi = spans[i % len(spans)]
            i += 1
            pool = [t for t in range(lo, hi + 1) if t not in picked]
            if not pool:
                continue
            if strategy == "split_random":
                t = int(rng.choice(pool))
            else:  # split_entropy
                uu = np.asarray(u, dtype=np.float64)
                t = max(pool, key=lambda t: (uu[t - 1], -t))
            picked.add(t)
            centers.append(t)
        centers.sort()

    return [ClipQuery(video.id, c, *clip_interval(c, clip_len, T)) for c in centers]


def coreset_select(embeddings, existing, K: int) -> list:
    """Greedy k-center: repeatedly take the point farthest from the set.

    Returns the indices of the K newly selected points in pick order;
    ties go to the smaller index, and an empty existing set starts from
    index 0 (every distance is infinite, so the first max wins).
    """
    X = np.asarray(embeddings, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("embeddings must be a non-empty N x D matrix")
    if K < 1:
        raise ValueError("K must be >= 1")
    n = X.shape[0]
    dist = np.full(n, np.inf)
    for i in existing:
        if not 0 <= i < n:
            raise IndexError(f"existing index {i} out of range")
        dist = np.minimum(dist, np.linalg.norm(X - X[i], axis=1))
        dist[i] = -np.inf
    picked = []
    for _ in range(min(K, int(np.sum(dist > -np.inf)))):
        nxt = int(np.argmax(dist))
        picked.append(nxt)
        dist = np.minimum(dist, np.linalg.norm(X - X[nxt], axis=1))
        dist[nxt] = -np.inf
    return picked
