"""Videos, labels, segments, synthetic benchmark generation, and disk I/O.

A dataset lives on disk as::

    root/
      features/<id>.feat     binary frame-feature matrix (or <id>.csv)
      groundTruth/<id>.txt   one class name per line, one line per frame
      mapping.txt            lines "<int> <class name>"
      splits/train.txt       one video id per line
      splits/test.txt

Frame indices are 1-based in every public interface; arrays are stored
0-based internally.
"""

from __future__ import annotations

import os
import struct
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

FEAT_MAGIC = b"BACTFEAT"


class DatasetError(Exception):
    """Base class for dataset load/save failures."""


class MissingFileError(DatasetError):
    pass


class UnknownClassNameError(DatasetError):
    pass


class LengthMismatchError(DatasetError):
    pass


@dataclass(frozen=True)
class VideoRecord:
    """One untrimmed video: a T x D feature matrix plus optional labels."""

    id: str
    features: np.ndarray
    gt_labels: Optional[np.ndarray] = None

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=np.float32)
        if feats.ndim != 2 or feats.shape[0] < 1 or feats.shape[1] < 1:
            raise ValueError(f"video {self.id!r}: features must be a T x D matrix with T,D >= 1")
        object.__setattr__(self, "features", feats)
        if self.gt_labels is not None:
            labels = np.asarray(self.gt_labels, dtype=np.int64)
            if labels.shape != (feats.shape[0],):
                raise LengthMismatchError(
                    f"video {self.id!r}: {labels.shape[0]} labels for {feats.shape[0]} frames"
                )
            if labels.min() < 0:
                raise ValueError(f"video {self.id!r}: negative class id")
            object.__setattr__(self, "gt_labels", labels)

    @property
    def T(self) -> int:
        return self.features.shape[0]

    @property
    def D(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True)
class Segment:
    """A maximal run of one class; start/end are 1-based inclusive frames."""

    label: int
    start: int
    end: int

    def __post_init__(self):
        if self.start > self.end:
            raise ValueError(f"segment start {self.start} > end {self.end}")

    @property
    def length(self) -> int:
        return self.end - self.start + 1


@dataclass(frozen=True)
class SyntheticConfig:
    """Knobs for the seeded synthetic benchmark generator."""

    num_videos: int = 75
    num_classes: int = 6
    feature_dim: int = 16
    min_segment_len: int = 30
    max_segment_len: int = 90
    mean_frames: int = 500
    noise_sigma: float = 1.0
    transition_band: int = 8  # half-width, in frames, of the blended region at boundaries
    class_separation: float = 2.0
    test_fraction: float = 0.2
    seed: int = 0

    def __post_init__(self):
        if self.num_videos < 1:
            raise ValueError("num_videos must be >= 1")
        if self.num_classes < 2:
            raise ValueError("num_classes must be >= 2")
        if self.feature_dim < 1:
            raise ValueError("feature_dim must be >= 1")
        if not 1 <= self.min_segment_len <= self.max_segment_len:
            raise ValueError("need 1 <= min_segment_len <= max_segment_len")
        if self.mean_frames < 1:
            raise ValueError("mean_frames must be >= 1")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        if self.transition_band < 0:
            raise ValueError("transition_band must be >= 0")
        if not 0.0 <= self.test_fraction < 1.0:
            raise ValueError("test_fraction must be in [0, 1)")


@dataclass
class Dataset:
    """An ordered collection of videos plus the class-name table and splits."""

    videos: list[VideoRecord]
    class_names: list[str]
    train_ids: list[str] = field(default_factory=list)
    test_ids: list[str] = field(default_factory=list)

    def __post_init__(self):
        ids = [v.id for v in self.videos]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate video ids")
        self._by_id = {v.id: v for v in self.videos}

    @property
    def num_classes(self) -> int:
        return len(self.class_names)

    def video(self, video_id: str) -> VideoRecord:
        try:
            return self._by_id[video_id]
        except KeyError:
            raise KeyError(f"unknown video id {video_id!r}") from None

    def split(self, name: str) -> list[VideoRecord]:
        ids = {"train": self.train_ids, "test": self.test_ids}[name]
        return [self.video(i) for i in ids]

    def total_frames(self, split: str = "train") -> int:
        return sum(v.T for v in self.split(split))


def segments_from_labels(labels: Sequence[int]) -> list[Segment]:
    """Run-length encode a label sequence into contiguous segments."""
    labels = np.asarray(labels)
    if labels.size == 0:
        raise ValueError("empty label sequence")
    change = np.flatnonzero(labels[1:] != labels[:-1]) + 1  # 0-based start of each new run
    starts = np.concatenate(([0], change))
    ends = np.concatenate((change, [labels.size]))
    return [Segment(int(labels[s]), int(s) + 1, int(e)) for s, e in zip(starts, ends)]


def labels_from_segments(segments: Sequence[Segment]) -> np.ndarray:
    """Expand segments back into the per-frame label sequence."""
    if not segments:
        raise ValueError("empty segment list")
    return np.concatenate([np.full(s.length, s.label, dtype=np.int64) for s in segments])


def _sample_transcript(rng: np.random.Generator, cfg: SyntheticConfig) -> list[Segment]:
    """Markov transcript: each class jumps uniformly to one of the others."""
    segments = []
    total = 0
    label = int(rng.integers(cfg.num_classes))
    while total < cfg.mean_frames:
        length = int(rng.integers(cfg.min_segment_len, cfg.max_segment_len + 1))
        segments.append(Segment(label, total + 1, total + length))
        total += length
        step = int(rng.integers(cfg.num_classes - 1))
        label = step if step < label else step + 1
    return segments


def generate_synthetic(cfg: SyntheticConfig) -> Dataset:
    """Generate a seeded benchmark with controllable boundary ambiguity.

    Per-frame features are the class mean plus Gaussian noise; within
    ``transition_band`` frames of each boundary the mean is linearly
    blended between the two adjacent classes, so frames straddling a
    transition are genuinely ambiguous.
    """
    rng = np.random.default_rng(cfg.seed)
    means = cfg.class_separation * rng.normal(size=(cfg.num_classes, cfg.feature_dim))
    width = len(str(max(cfg.num_videos - 1, 1)))

    videos = []
    for i in range(cfg.num_videos):
        segments = _sample_transcript(rng, cfg)
        labels = labels_from_segments(segments)
        T = labels.size
        frame_means = means[labels].copy()
        tau = cfg.transition_band
        if tau > 0:
            for prev_seg, next_seg in zip(segments[:-1], segments[1:]):
                b = next_seg.start  # 1-based first frame of the new class
                for d in range(-tau, tau):
                    t = b + d
                    if not 1 <= t <= T:
                        continue
                    lam = (d + tau + 0.5) / (2.0 * tau)
                    frame_means[t - 1] = (1 - lam) * means[prev_seg.label] + lam * means[next_seg.label]
        feats = frame_means + cfg.noise_sigma * rng.normal(size=(T, cfg.feature_dim))
        videos.append(VideoRecord(f"video_{i:0{width}d}", feats.astype(np.float32), labels))

    n_test = int(round(cfg.num_videos * cfg.test_fraction))
    n_train = max(1, cfg.num_videos - n_test)
    ids = [v.id for v in videos]
    class_names = [f"class_{c}" for c in range(cfg.num_classes)]
    return Dataset(videos, class_names, train_ids=ids[:n_train], test_ids=ids[n_train:])


def _atomic_write(path: Path, data: bytes) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_feature_file(path: Path, features: np.ndarray) -> None:
    feats = np.ascontiguousarray(features, dtype="<f4")
    header = FEAT_MAGIC + struct.pack("<II", feats.shape[0], feats.shape[1])
    _atomic_write(path, header + feats.tobytes())


def read_feature_file(path: Path) -> np.ndarray:
    raw = path.read_bytes()
    if len(raw) < 16 or raw[:8] != FEAT_MAGIC:
        raise DatasetError(f"{path}: not a feature file (bad magic)")
    T, D = struct.unpack("<II", raw[8:16])
    expected = 16 + 4 * T * D
    if len(raw) != expected:
        raise DatasetError(f"{path}: expected {expected} bytes for {T}x{D}, got {len(raw)}")
    return np.frombuffer(raw[16:], dtype="<f4").reshape(T, D).copy()


def save_dataset(ds: Dataset, root: str | Path, feature_format: str = "feat") -> None:
    """Write the on-disk layout that load_dataset reads; one atomic write per file."""
    if feature_format not in ("feat", "csv"):
        raise ValueError("feature_format must be 'feat' or 'csv'")
    root = Path(root)
    for sub in ("features", "groundTruth", "splits"):
        (root / sub).mkdir(parents=True, exist_ok=True)

    lines = [f"{c} {name}" for c, name in enumerate(ds.class_names)]
    _atomic_write(root / "mapping.txt", ("\n".join(lines) + "\n").encode())

    for v in ds.videos:
        if feature_format == "feat":
            write_feature_file(root / "features" / f"{v.id}.feat", v.features)
        else:
            rows = "\n".join(",".join(f"{x:.9g}" for x in row) for row in v.features)
            _atomic_write(root / "features" / f"{v.id}.csv", (rows + "\n").encode())
        if v.gt_labels is not None:
            names = "\n".join(ds.class_names[c] for c in v.gt_labels)
            _atomic_write(root / "groundTruth" / f"{v.id}.txt", (names + "\n").encode())

    _atomic_write(root / "splits" / "train.txt", ("\n".join(ds.train_ids) + "\n").encode())
    _atomic_write(root / "splits" / "test.txt", ("\n".join(ds.test_ids) + "\n").encode())


def _read_id_list(path: Path) -> list[str]:
    return [line.strip() for line in path.read_text().splitlines() if line.strip()]


def load_dataset(root: str | Path) -> Dataset:
    """Load the standard directory layout.

    Ground-truth files are optional per video; split files default to
    "all videos in train" when absent.
    """
    root = Path(root)
    mapping_path = root / "mapping.txt"
    if not mapping_path.is_file():
        raise MissingFileError(f"missing mapping file {mapping_path}")
    name_to_id: dict[str, int] = {}
    for line in mapping_path.read_text().splitlines():
        if not line.strip():
            continue
        idx, name = line.split(maxsplit=1)
        name_to_id[name.strip()] = int(idx)
    class_names = [None] * len(name_to_id)
    for name, c in name_to_id.items():
        if not 0 <= c < len(name_to_id) or class_names[c] is not None:
            raise DatasetError(f"mapping file has non-contiguous or duplicate class ids ({c})")
        class_names[c] = name

    feat_dir = root / "features"
    if not feat_dir.is_dir():
        raise MissingFileError(f"missing features directory {feat_dir}")
    paths: dict[str, Path] = {}
    for p in sorted(feat_dir.iterdir()):
        if p.suffix == ".feat":
            paths[p.stem] = p
        elif p.suffix == ".csv":
            paths.setdefault(p.stem, p)

    videos = []
    for vid, p in sorted(paths.items()):
        if p.suffix == ".feat":
            feats = read_feature_file(p)
        else:
            feats = np.loadtxt(p, delimiter=",", dtype=np.float32, ndmin=2)
        gt_path = root / "groundTruth" / f"{vid}.txt"
        labels = None
        if gt_path.is_file():
            names = [line.strip() for line in gt_path.read_text().splitlines() if line.strip()]
            unknown = next((n for n in names if n not in name_to_id), None)
            if unknown is not None:
                raise UnknownClassNameError(f"video {vid!r}: label {unknown!r} not in mapping")
            if len(names) != feats.shape[0]:
                raise LengthMismatchError(
                    f"video {vid!r}: {len(names)} labels for {feats.shape[0]} feature rows"
                )
            labels = np.array([name_to_id[n] for n in names], dtype=np.int64)
        videos.append(VideoRecord(vid, feats, labels))

    known = {v.id for v in videos}
    train_path = root / "splits" / "train.txt"
    test_path = root / "splits" / "test.txt"
    train_ids = _read_id_list(train_path) if train_path.is_file() else sorted(known)
    test_ids = _read_id_list(test_path) if test_path.is_file() else []
    for vid in train_ids + test_ids:
        if vid not in known:
            raise MissingFileError(f"split lists video {vid!r} but features/{vid}.* is missing")
    return Dataset(videos, class_names, train_ids=train_ids, test_ids=test_ids)
