"""Annotators and results export.

Two interchangeable label sources answer clip queries: a ground-truth
oracle with optional seeded label noise, and a session store that
parks a round's queries for a human working through the HTTP service.
The loop thread publishes a round, blocks, and resumes when every query
is answered or the session is cancelled (cancel keeps the answers given
so far and drops the rest).
"""

from __future__ import annotations

import csv
import json
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .acquisition import ClipQuery
from .dataset import Dataset
from .seeding import spawn_rng

SCHEMA_VERSION = 1


class AnnotationError(Exception):
    pass


class UnknownSessionError(AnnotationError):
    pass


class UnknownRequestError(AnnotationError):
    pass


class DuplicateLabelError(AnnotationError):
    pass


class NoOutstandingQueriesError(AnnotationError):
    pass


class InvalidClassError(AnnotationError):
    pass


@dataclass(frozen=True)
class AnnotationRequest:
    """One pending query as shown to an annotator; carries no ground truth."""

    session_id: str
    query: ClipQuery
    class_names: tuple
    context: Optional[tuple] = None  # clip feature rows for display only

    def to_dict(self) -> dict:
        return {
            "session": self.session_id,
            "video": self.query.video_id,
            "frame": self.query.frame,
            "lo": self.query.lo,
            "hi": self.query.hi,
            "class_names": list(self.class_names),
            "context": [list(row) for row in self.context] if self.context is not None else None,
        }


@dataclass(frozen=True)
class AnnotationResponse:
    session_id: str
    video_id: str
    frame: int
    label: int
    annotator: str  # "oracle" or "human"
    timestamp: float


def oracle_annotate(ds: Dataset, q: ClipQuery, seed: int = 0, noise: float = 0.0):
    """Answer from ground truth; with probability noise, flip the label.

    The flip decision and replacement class derive from (seed, video,
    frame) alone, so a query always gets the same answer.
    """
    if not 0.0 <= noise <= 1.0:
        raise ValueError("noise must lie in [0, 1]")
    video = ds.video(q.video_id)
    if video.gt_labels is None:
        raise ValueError(f"video {q.video_id!r} has no ground truth")
    if not 1 <= q.frame <= video.T:
        raise IndexError(f"frame {q.frame} outside video {q.video_id!r}")
    label = int(video.gt_labels[q.frame - 1])
    C = ds.num_classes
    if noise > 0.0 and C > 1:
        rng = spawn_rng("oracle", seed, q.video_id, q.frame)
        if rng.random() < noise:
            step = int(rng.integers(C - 1))
            label = step if step < label else step + 1
    return AnnotationResponse("", q.video_id, q.frame, label, "oracle", 0.0)


@dataclass
class _Round:
    session_id: str
    queries: list
    answers: dict = field(default_factory=dict)
    cancelled: bool = False
    done: threading.Event = field(default_factory=threading.Event)


class SessionStore:
    """Annotation barrier between the loop thread and HTTP clients.

    The loop publishes a round's queries and blocks in wait(); clients
    answer through sessions. All mutations run under one lock and each
    (video, frame) is recorded at most once.
    """

    def __init__(self):
        self._lock = threading.Lock()
        self._experiments = {}  # exp_id -> {class_names, context, round}
        self._sessions = {}  # session_id -> (exp_id, _Round)
        self._counter = 0

    def register_experiment(self, exp_id: str, class_names: Sequence[str], contexts=None):
        with self._lock:
            self._experiments[exp_id] = {
                "class_names": tuple(class_names),
                "contexts": contexts or {},
                "round": None,
                "round_no": 0,
            }

    def experiment_ids(self) -> list:
        with self._lock:
            return sorted(self._experiments)

    def class_names(self, exp_id: str) -> tuple:
        with self._lock:
            exp = self._experiments.get(exp_id)
            if exp is None:
                raise UnknownSessionError(f"unknown experiment {exp_id!r}")
            return exp["class_names"]

    def publish_round(self, exp_id: str, queries: Sequence[ClipQuery]) -> str:
        """Expose a round's queries and return its (pre-created) session id."""
        with self._lock:
            exp = self._experiments[exp_id]
            if exp["round"] is not None and not exp["round"].done.is_set():
                raise AnnotationError("previous round still outstanding")
            exp["round_no"] += 1
            session_id = f"{exp_id}.r{exp['round_no']}"
            rnd = _Round(session_id=session_id, queries=list(queries))
            if not queries:
                rnd.done.set()
            exp["round"] = rnd
            self._sessions[session_id] = (exp_id, rnd)
            return session_id

    def wait(self, exp_id: str, timeout: Optional[float] = None) -> dict:
        """Block until the published round completes; return its answers."""
        with self._lock:
            rnd = self._experiments[exp_id]["round"]
        if rnd is None:
            raise AnnotationError("no published round to wait on")
        if not rnd.done.wait(timeout):
            raise TimeoutError("annotation round did not complete in time")
        with self._lock:
            return dict(rnd.answers)

    def create_session(self, exp_id: str) -> str:
        """Idempotent per round: returns the round's session id."""
        with self._lock:
            exp = self._experiments.get(exp_id)
            if exp is None:
                raise UnknownSessionError(f"unknown experiment {exp_id!r}")
            rnd = exp["round"]
            if rnd is None or rnd.done.is_set():
                raise NoOutstandingQueriesError("no outstanding queries")
            return rnd.session_id

    def _round(self, session_id: str) -> tuple:
        pair = self._sessions.get(session_id)
        if pair is None:
            raise UnknownSessionError(f"unknown session {session_id!r}")
        return pair

    def get_pending(self, session_id: str) -> list:
        with self._lock:
            exp_id, rnd = self._round(session_id)
            exp = self._experiments[exp_id]
            pending = [
                q
                for q in rnd.queries
                if (q.video_id, q.frame) not in rnd.answers
            ]
            pending.sort(key=lambda q: (q.video_id, q.frame))
            return [
                AnnotationRequest(
                    session_id=session_id,
                    query=q,
                    class_names=exp["class_names"],
                    context=exp["contexts"].get((q.video_id, q.frame)),
                )
                for q in pending
            ]

    def submit_label(self, session_id: str, video_id: str, frame: int, label: int):
        with self._lock:
            exp_id, rnd = self._round(session_id)
            exp = self._experiments[exp_id]
            key = (video_id, int(frame))
            if all((q.video_id, q.frame) != key for q in rnd.queries):
                raise UnknownRequestError(f"no query for {key}")
            if key in rnd.answers:
                raise DuplicateLabelError(f"{key} already labeled")
            if not 0 <= int(label) < len(exp["class_names"]):
                raise InvalidClassError(f"class id {label} out of range")
            if rnd.cancelled:
                raise AnnotationError("session was cancelled")
            rnd.answers[key] = int(label)
            remaining = len(rnd.queries) - len(rnd.answers)
            if remaining == 0:
                rnd.done.set()
            return AnnotationResponse(
                session_id, video_id, int(frame), int(label), "human", time.time()
            ), remaining

    def cancel(self, session_id: str) -> int:
        """Drop unanswered queries; the blocked round resumes with partials."""
        with self._lock:
            _, rnd = self._round(session_id)
            rnd.cancelled = True
            dropped = len(rnd.queries) - len(rnd.answers)
            rnd.done.set()
            return dropped


def session_annotator(store: SessionStore, exp_id: str, ds: Dataset, context_dim_cap: int = 64):
    """Adapter giving run_experiment a human annotator via the store."""

    def annotate(queries):
        contexts = {}
        for q in queries:
            feats = ds.video(q.video_id).features[q.lo - 1 : q.hi, :context_dim_cap]
            contexts[(q.video_id, q.frame)] = tuple(tuple(float(x) for x in row) for row in feats)
        with store._lock:
            store._experiments[exp_id]["contexts"] = contexts
        store.publish_round(exp_id, queries)
        return store.wait(exp_id)

    return annotate


def export_results(history: Sequence, out_dir, config: Optional[dict] = None) -> None:
    """Write history.json, history.csv, and per-round selections.json."""
    if not history:
        raise ValueError("refusing to export an empty history")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    payload = {"schema_version": SCHEMA_VERSION, "rounds": [h.to_dict() for h in history]}
    if config is not None:
        payload["config"] = config
    (out / "history.json").write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )

    with open(out / "history.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["round", "labeled_before", "labeled_after"] + history[0].report.csv_header()
        )
        for h in history:
            writer.writerow(
                [h.round_index, h.labeled_before, h.labeled_after] + h.report.csv_row()
            )

    selections = {
        "schema_version": SCHEMA_VERSION,
        "rounds": {str(h.round_index): [dict(q) for q in h.queries] for h in history},
    }
    (out / "selections.json").write_text(
        json.dumps(selections, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def load_history(path) -> dict:
    """Parse an exported history.json back into plain dicts."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if data.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported history schema {data.get('schema_version')!r}")
    return data
