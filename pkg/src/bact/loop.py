"""Round-based active learning orchestration.

Each round trains a fresh classifier on the labeled frame set, scores
the test split, and, while budget remains, ranks unlabeled videos by
mean frame uncertainty, picks boundary-centered clips inside the top
videos, asks the annotator for the center-frame labels, and transfers
the queried videos out of the unlabeled pool. Queried videos are never
revisited.

All randomness is derived from the experiment seed, so a (config, seed)
pair fixes the full trajectory including metrics.
"""

from __future__ import annotations

import dataclasses
import itertools
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .acquisition import (
    BASELINE_STRATEGIES,
    ClipQuery,
    ScoreWeights,
    baseline_select_clips,
    clip_interval,
    coreset_select,
    score_boundaries,
    select_top_k_boundaries,
)
from .dataset import Dataset
from .metrics import MetricReport, evaluate
from .predictor import PredictorConfig, mc_sample, mean_probs, predict_probs, train
from .seeding import derive_seed, spawn_rng
from .uncertainty import ACQUISITION_FNS, VideoScore, frame_uncertainties, select_videos, video_score

VIDEO_STRATEGIES = ("uncertainty", "random")
CLIP_STRATEGIES = ("boundary",) + BASELINE_STRATEGIES + ("coreset",)
STOP_REASONS = ("rounds_done", "budget", "pool_exhausted")

CLIP_LENGTH_GRID = (0, 10, 20, 30, 40, 50)


def weight_grid(step: float = 0.1):
    """All (alpha, beta, gamma) on the step lattice with alpha+beta+gamma=1."""
    n = int(round(1.0 / step))
    combos = []
    for a in range(n + 1):
        for b in range(n + 1 - a):
            g = n - a - b
            if a <= 4 and b <= 4 and g <= 6:  # search box used for the default sweep
                combos.append((a * step, b * step, g * step))
    return combos


class BudgetExceededError(RuntimeError):
    pass


class LabeledIndexSet:
    """Labeled (video, frame) pairs with their class ids; grows only."""

    def __init__(self):
        self._labels = {}

    def __len__(self):
        return len(self._labels)

    def __contains__(self, key):
        return tuple(key) in self._labels

    def add(self, video_id: str, frame: int, label: int) -> None:
        key = (video_id, int(frame))
        if key in self._labels:
            raise ValueError(f"duplicate label for {key}")
        if label < 0:
            raise ValueError("negative class id")
        self._labels[key] = int(label)

    def label_of(self, video_id: str, frame: int) -> int:
        return self._labels[(video_id, int(frame))]

    def triples(self) -> list:
        return sorted((v, f, y) for (v, f), y in self._labels.items())

    def frames_of(self, video_id: str) -> list:
        return sorted(f for (v, f) in self._labels if v == video_id)


@dataclass(frozen=True)
class LoopConfig:
    rounds: int = 4
    budget: int = 50
    n_query: int = 2
    clips_per_video: int = 5
    clip_len: int = 20
    n_init: int = 4
    init_clips: int = 5
    video_strategy: str = "uncertainty"
    clip_strategy: str = "boundary"
    acquisition: str = "entropy"
    power_beta: float = 1.0
    weights: ScoreWeights = field(default_factory=ScoreWeights)
    predictor: PredictorConfig = field(default_factory=PredictorConfig)
    label_noise: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.rounds < 0:
            raise ValueError("rounds must be >= 0")
        for name in ("budget", "n_query", "clips_per_video", "n_init", "init_clips"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.clip_len < 0:
            raise ValueError("clip_len must be >= 0")
        if self.budget < self.n_init * self.init_clips:
            raise ValueError("budget smaller than the initialization cost")
        if self.video_strategy not in VIDEO_STRATEGIES:
            raise ValueError(f"video_strategy must be one of {VIDEO_STRATEGIES}")
        if self.clip_strategy not in CLIP_STRATEGIES:
            raise ValueError(f"clip_strategy must be one of {CLIP_STRATEGIES}")
        if self.acquisition not in ACQUISITION_FNS:
            raise ValueError(f"acquisition must be one of {ACQUISITION_FNS}")
        if not 0.0 <= self.label_noise <= 1.0:
            raise ValueError("label_noise must lie in [0, 1]")


@dataclass
class LoopState:
    ds: Dataset
    d_labeled: set
    d_unlabeled: set
    omega: LabeledIndexSet
    round_index: int = 0


@dataclass(frozen=True)
class RoundHistory:
    round_index: int
    labeled_before: int
    labeled_after: int
    queried_videos: tuple
    queries: tuple  # selection records: video/center/interval/strategy/scores
    report: MetricReport
    wall_time: float
    stop_reason: Optional[str] = None

    def to_dict(self) -> dict:
        """Serializable projection; wall time is excluded so that equal
        (config, seed) runs export byte-identical history files."""
        return {
            "round": self.round_index,
            "labeled_before": self.labeled_before,
            "labeled_after": self.labeled_after,
            "queried_videos": list(self.queried_videos),
            "queries": [dict(q) for q in self.queries],
            "report": self.report.to_dict(),
            "stop_reason": self.stop_reason,
        }


def _gt_label(ds: Dataset, video_id: str, frame: int) -> int:
    video = ds.video(video_id)
    if video.gt_labels is None:
        raise ValueError(f"video {video_id!r} has no ground truth to annotate from")
    return int(video.gt_labels[frame - 1])


def _default_annotator(ds: Dataset, cfg: LoopConfig) -> Callable:
    from .annotate import oracle_annotate

    def annotate(queries):
        out = {}
        for q in queries:
            resp = oracle_annotate(ds, q, seed=cfg.seed, noise=cfg.label_noise)
            out[(q.video_id, q.frame)] = resp.label
        return out

    return annotate


def init_pools(ds: Dataset, cfg: LoopConfig, annotate: Optional[Callable] = None):
    """Seed the labeled pool with n_init videos, init_clips labels each."""
    train_ids = sorted(ds.train_ids)
    if cfg.n_init > len(train_ids):
        raise ValueError(f"n_init={cfg.n_init} exceeds train split of {len(train_ids)}")
    rng = spawn_rng("init_pools", cfg.seed)
    chosen = sorted(str(v) for v in rng.choice(train_ids, size=cfg.n_init, replace=False))

    queries = []
    for vid in chosen:
        queries.extend(
            baseline_select_clips(
                "split_random",
                ds.video(vid),
                None,
                None,
                cfg.init_clips,
                cfg.clip_len,
                seed=derive_seed("init_clips", cfg.seed),
            )
        )
    if annotate is None:
        answers = {(q.video_id, q.frame): _gt_label(ds, q.video_id, q.frame) for q in queries}
    else:
        answers = annotate(queries)

    omega = LabeledIndexSet()
    for (vid, frame), label in answers.items():
        omega.add(vid, frame, label)
    if len(omega) > cfg.budget:
        raise BudgetExceededError(f"initialization used {len(omega)} of {cfg.budget} labels")
    d_labeled = set(chosen)
    d_unlabeled = set(train_ids) - d_labeled
    return d_labeled, d_unlabeled, omega


def _evaluate_model(model, ds: Dataset) -> MetricReport:
    preds, gts = {}, {}
    for vid in sorted(ds.test_ids):
        video = ds.video(vid)
        preds[vid] = predict_probs(model, video).probs.argmax(axis=1)
        gts[vid] = video.gt_labels
    return evaluate(preds, gts, num_classes=ds.num_classes)


def _stage1_scores(model, ds, pool, cfg, round_seed):
    """MC-sample every pool video once; return per-video scores and caches."""
    cache = {}
    scores = []
    for vid in sorted(pool):
        video = ds.video(vid)
        samples = mc_sample(model, video, S=cfg.predictor.mc_passes, seed=round_seed)
        mean = mean_probs(samples)
        u = frame_uncertainties(
            samples, fn=cfg.acquisition, seed=round_seed, power_beta=cfg.power_beta
        )
        cache[vid] = (mean, u)
        scores.append(VideoScore(vid, video_score(u)))
    return scores, cache


def _select_clips_for_video(ds, vid, mean, u, omega, cfg, round_seed):
    """Stage 2 for one queried video; returns (queries, records)."""
    video = ds.video(vid)
    K = cfg.clips_per_video
    strategy = cfg.clip_strategy

    if strategy == "boundary":
        pred_labels = mean.probs.argmax(axis=1)
        cands = score_boundaries(vid, pred_labels, mean.probs, u, cfg.clip_len, cfg.weights)
        queries = select_top_k_boundaries(
            cands, K, cfg.clip_len, {vid: video.T}, min_separation=cfg.clip_len
        )
        by_center = {c.b: c for c in cands}
        records = [
            {
                **q.to_dict(),
                "strategy": strategy,
                "fused": by_center[q.center].fused,
                "u_local": by_center[q.center].u_local,
                "gap": by_center[q.center].gap,
                "grad": by_center[q.center].grad,
            }
            for q in queries
        ]
        if len(queries) < K:  # boundary shortfall: pad with per-span entropy picks
            taken = {q.center for q in queries}
            fill = [
                q
                for q in baseline_select_clips(
                    "split_entropy", video, mean, u, K, cfg.clip_len, seed=round_seed
                )
                if q.center not in taken
            ][: K - len(queries)]
            queries = queries + fill
            records += [{**q.to_dict(), "strategy": "split_entropy_fill"} for q in fill]
        return queries, records

    if strategy == "coreset":
        existing = [f - 1 for f in omega.frames_of(vid)]
        picked = coreset_select(video.features, existing, K)
        queries = [
            ClipQuery(vid, i + 1, *clip_interval(i + 1, cfg.clip_len, video.T)) for i in picked
        ]
    else:
        queries = baseline_select_clips(strategy, video, mean, u, K, cfg.clip_len, seed=round_seed)
    return queries, [{**q.to_dict(), "strategy": strategy} for q in queries]


def run_round(state: LoopState, cfg: LoopConfig, annotate: Optional[Callable] = None):
    """One train/evaluate/query/annotate/transfer cycle."""
    ds = state.ds
    if annotate is None:
        annotate = _default_annotator(ds, cfg)
    r = state.round_index + 1
    t0 = time.perf_counter()

    pcfg = replace(cfg.predictor, seed=derive_seed("round_train", cfg.seed, r))
    model = train(ds, state.omega.triples(), pcfg)
    report = _evaluate_model(model, ds)
    before = len(state.omega)

    planned = cfg.n_query * cfg.clips_per_video
    if before + planned > cfg.budget or not state.d_unlabeled:
        reason = "pool_exhausted" if not state.d_unlabeled else "budget"
        hist = RoundHistory(r, before, before, (), (), report, time.perf_counter() - t0, reason)
        state.round_index = r
        return state, hist

    round_seed = derive_seed("round", cfg.seed, r)
    if cfg.video_strategy == "uncertainty":
        scores, cache = _stage1_scores(model, ds, state.d_unlabeled, cfg, round_seed)
        chosen = select_videos(scores, cfg.n_query)
    else:
        rng = spawn_rng("video_random", cfg.seed, r)
        pool = sorted(state.d_unlabeled)
        take = min(cfg.n_query, len(pool))
        chosen = {str(v) for v in rng.choice(pool, size=take, replace=False)}
        _, cache = _stage1_scores(model, ds, chosen, cfg, round_seed)

    queries, records = [], []
    for vid in sorted(chosen):
        mean, u = cache[vid]
        q, rec = _select_clips_for_video(ds, vid, mean, u, state.omega, cfg, round_seed)
        queries.extend(q)
        records.extend(rec)

    answers = annotate(queries)  # raises -> round aborts with state untouched
    answered = {(q.video_id, q.frame) for q in queries} & set(answers)
    if len(state.omega) + len(answered) > cfg.budget:
        raise BudgetExceededError("annotation would exceed the label budget")
    for vid, frame in sorted(answered):
        state.omega.add(vid, frame, answers[(vid, frame)])
    state.d_labeled |= chosen
    state.d_unlabeled -= chosen

    hist = RoundHistory(
        round_index=r,
        labeled_before=before,
        labeled_after=len(state.omega),
        queried_videos=tuple(sorted(chosen)),
        queries=tuple(records),
        report=report,
        wall_time=time.perf_counter() - t0,
    )
    state.round_index = r
    return state, hist


def run_experiment(
    ds: Dataset,
    cfg: LoopConfig,
    annotate: Optional[Callable] = None,
    on_round: Optional[Callable] = None,
) -> list:
    """Run up to cfg.rounds rounds; the last entry carries the stop reason.

    on_round, when given, is called with each RoundHistory as it lands,
    so a serving layer can stream progress.
    """
    if cfg.rounds == 0:
        return []
    d_l, d_u, omega = init_pools(ds, cfg, annotate=annotate)
    state = LoopState(ds=ds, d_labeled=d_l, d_unlabeled=d_u, omega=omega)
    history = []
    for _ in range(cfg.rounds):
        state, hist = run_round(state, cfg, annotate=annotate)
        history.append(hist)
        if on_round is not None:
            on_round(hist)
        if hist.stop_reason is not None:
            break
    if history and history[-1].stop_reason is None:
        history[-1] = replace(history[-1], stop_reason="rounds_done")
    return history


def sweep(ds: Dataset, base: LoopConfig, grid: dict, annotate: Optional[Callable] = None):
    """Cartesian product of config overrides; one experiment per point.

    Grid keys are LoopConfig field names; a "weights" value may be an
    (alpha, beta, gamma) tuple. Returns [(overrides, final report)].
    """
    keys = sorted(grid)
    rows = []
    for combo in itertools.product(*(grid[k] for k in keys)):
        overrides = dict(zip(keys, combo))
        patch = dict(overrides)
        if "weights" in patch and not isinstance(patch["weights"], ScoreWeights):
            patch["weights"] = ScoreWeights(*patch["weights"])
        cfg = replace(base, **patch)
        history = run_experiment(ds, cfg, annotate=annotate)
        final = history[-1].report if history else None
        rows.append((overrides, final))
    return rows
