"""Segmentation metrics: frame accuracy, segmental edit score, overlap F1.

Protocol: accuracy is pooled over all frames, edit score is averaged per
video (a pooled variant is available via ``edit_pooled``), and F1 true/false
positive counts are pooled across videos before computing precision/recall.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .dataset import Segment, segments_from_labels

DEFAULT_THRESHOLDS = (0.10, 0.25, 0.50)


def frame_accuracy(pred: Sequence[int], gt: Sequence[int]) -> float:
    pred = np.asarray(pred)
    gt = np.asarray(gt)
    if pred.size == 0:
        raise ValueError("empty label sequence")
    if pred.shape != gt.shape:
        raise ValueError(f"length mismatch: {pred.shape} vs {gt.shape}")
    return 100.0 * float(np.mean(pred == gt))


def levenshtein(a: Sequence[int], b: Sequence[int]) -> int:
    """Edit distance between two transcripts (unit-cost ins/del/sub)."""
    m, n = len(a), len(b)
    prev = list(range(n + 1))
    for i in range(1, m + 1):
        cur = [i] + [0] * n
        for j in range(1, n + 1):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost)
        prev = cur
    return prev[n]


def edit_score(pred: Sequence[int], gt: Sequence[int]) -> float:
    """Normalized segmental edit similarity between the two transcripts, in percent."""
    p = [s.label for s in segments_from_labels(pred)]
    g = [s.label for s in segments_from_labels(gt)]
    dist = levenshtein(p, g)
    return max(0.0, 100.0 * (1.0 - dist / max(len(p), len(g))))


def _segment_iou(a: Segment, b: Segment) -> float:
    inter = min(a.end, b.end) - max(a.start, b.start) + 1
    if inter <= 0:
        return 0.0
    union = max(a.end, b.end) - min(a.start, b.start) + 1
    return inter / union


def overlap_counts(pred: Sequence[int], gt: Sequence[int], tau: float) -> tuple[int, int, int]:
    """Greedy matching of predicted to ground-truth segments.

    Each prediction, in order, claims the same-class ground-truth segment
    with highest IoU; it counts as a true positive iff that IoU >= tau and
    the segment is still unclaimed. Returns (tp, fp, num_gt_segments).
    """
    if not 0.0 < tau < 1.0:
        raise ValueError(f"overlap threshold must be in (0,1), got {tau}")
    pred = np.asarray(pred)
    gt = np.asarray(gt)
    if pred.shape != gt.shape:
        raise ValueError(f"length mismatch: {pred.shape} vs {gt.shape}")
    p_segs = segments_from_labels(pred)
    g_segs = segments_from_labels(gt)
    claimed = [False] * len(g_segs)
    tp = fp = 0
    for ps in p_segs:
        ious = [_segment_iou(ps, gs) if ps.label == gs.label else 0.0 for gs in g_segs]
        best = int(np.argmax(ious))
        if ious[best] >= tau and not claimed[best]:
            tp += 1
            claimed[best] = True
        else:
            fp += 1
    return tp, fp, len(g_segs)


def _prf(tp: int, fp: int, n_gt: int) -> tuple[float, float, float]:
    precision = 100.0 * tp / (tp + fp) if tp + fp else 0.0
    recall = 100.0 * tp / n_gt if n_gt else 0.0
    f1 = 2 * precision * recall / (precision + recall) if tp else 0.0
    return f1, precision, recall


def f1_at_overlap(pred: Sequence[int], gt: Sequence[int], tau: float) -> tuple[float, float, float]:
    """(f1, precision, recall) in percent at IoU threshold tau."""
    return _prf(*overlap_counts(pred, gt, tau))


@dataclass
class MetricReport:
    accuracy: float
    edit: float
    f1: dict[float, tuple[float, float, float]]  # tau -> (f1, precision, recall)
    per_class: dict[int, tuple[float, float, float]] = field(default_factory=dict)
    frames_evaluated: int = 0

    @staticmethod
    def _key(tau: float) -> str:
        return str(int(round(tau * 100)))

    def to_dict(self) -> dict:
        out = {"acc": self.accuracy, "edit": self.edit}
        for tau in sorted(self.f1):
            f1, prec, rec = self.f1[tau]
            k = self._key(tau)
            out[f"f1_{k}"] = f1
            out[f"precision_{k}"] = prec
            out[f"recall_{k}"] = rec
        out["per_class"] = {
            str(c): {"precision": p, "recall": r, "f1": f}
            for c, (p, r, f) in sorted(self.per_class.items())
        }
        out["frames_evaluated"] = self.frames_evaluated
        return out

    def csv_header(self) -> list[str]:
        return ["acc", "edit"] + [f"f1_{self._key(t)}" for t in sorted(self.f1)]

    def csv_row(self) -> list[str]:
        vals = [self.accuracy, self.edit] + [self.f1[t][0] for t in sorted(self.f1)]
        return [repr(v) for v in vals]


def per_class_scores(
    preds: Mapping[str, Sequence[int]],
    gts: Mapping[str, Sequence[int]],
    num_classes: int | None = None,
) -> dict[int, tuple[float, float, float]]:
    """Frame-level precision/recall/F1 per class, pooled over all videos."""
    pred_all = np.concatenate([np.asarray(preds[k]) for k in sorted(preds)])
    gt_all = np.concatenate([np.asarray(gts[k]) for k in sorted(gts)])
    if num_classes is None:
        num_classes = int(max(pred_all.max(), gt_all.max())) + 1
    out = {}
    for c in range(num_classes):
        tp = int(np.sum((pred_all == c) & (gt_all == c)))
        fp = int(np.sum((pred_all == c) & (gt_all != c)))
        fn = int(np.sum((pred_all != c) & (gt_all == c)))
        precision = 100.0 * tp / (tp + fp) if tp + fp else 0.0
        recall = 100.0 * tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if tp else 0.0
        out[c] = (precision, recall, f1)
    return out


def evaluate(
    preds: Mapping[str, Sequence[int]],
    gts: Mapping[str, Sequence[int]],
    thresholds: Sequence[float] = DEFAULT_THRESHOLDS,
    num_classes: int | None = None,
    edit_pooled: bool = False,
) -> MetricReport:
    """Score predictions for a set of videos against ground truth."""
    if set(preds) != set(gts):
        raise ValueError(f"video id mismatch: {sorted(set(preds) ^ set(gts))}")
    if not preds:
        raise ValueError("nothing to evaluate")
    ids = sorted(preds)

    correct = total = 0
    edit_parts = []
    counts = {tau: [0, 0, 0] for tau in thresholds}
    for vid in ids:
        p = np.asarray(preds[vid])
        g = np.asarray(gts[vid])
        if p.shape != g.shape:
            raise ValueError(f"video {vid!r}: length mismatch {p.shape} vs {g.shape}")
        correct += int(np.sum(p == g))
        total += p.size
        pt = [s.label for s in segments_from_labels(p)]
        gt_t = [s.label for s in segments_from_labels(g)]
        edit_parts.append((levenshtein(pt, gt_t), max(len(pt), len(gt_t))))
        for tau in thresholds:
            tp, fp, n_gt = overlap_counts(p, g, tau)
            counts[tau][0] += tp
            counts[tau][1] += fp
            counts[tau][2] += n_gt

    if edit_pooled:
        edit = max(0.0, 100.0 * (1.0 - sum(d for d, _ in edit_parts) / sum(m for _, m in edit_parts)))
    else:
        edit = float(np.mean([max(0.0, 100.0 * (1.0 - d / m)) for d, m in edit_parts]))

    return MetricReport(
        accuracy=100.0 * correct / total,
        edit=edit,
        f1={tau: _prf(*counts[tau]) for tau in thresholds},
        per_class=per_class_scores(preds, gts, num_classes),
        frames_evaluated=total,
    )
