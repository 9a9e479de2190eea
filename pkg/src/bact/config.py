"""Experiment configuration: YAML in, dataclasses out.

A config file has four sections, all optional::

    experiment: demo          # id used by the HTTP service
    out: runs/demo            # default export directory
    seed: 3                   # convenience override for loop and data seeds
    dataset:
      synthetic: {num_videos: 75, num_classes: 6, ...}
      # or: path: data/my_dataset
    loop:
      rounds: 4
      budget: 50
      weights: {alpha: 0.2, beta: 0.3, gamma: 0.5}
      predictor: {context_radius: 7, dropout: 0.2, ...}

Unknown keys raise instead of being ignored, so typos surface early.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import yaml

from .acquisition import ScoreWeights
from .dataset import SyntheticConfig
from .loop import LoopConfig
from .predictor import PredictorConfig


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    loop: LoopConfig = field(default_factory=LoopConfig)
    synthetic: Optional[SyntheticConfig] = field(default_factory=SyntheticConfig)
    data_path: Optional[str] = None
    out_dir: str = "runs/exp"
    experiment_id: str = "exp"


def _build(cls, section: dict, path: str):
    known = {f.name for f in dataclasses.fields(cls)}
    extra = set(section) - known
    if extra:
        raise ConfigError(f"{path}: unknown keys {sorted(extra)}")
    return cls(**section)


def config_from_dict(raw: dict) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a mapping")
    known = {"experiment", "out", "seed", "dataset", "loop"}
    extra = set(raw) - known
    if extra:
        raise ConfigError(f"unknown top-level keys {sorted(extra)}")

    loop_raw = dict(raw.get("loop") or {})
    if "weights" in loop_raw and isinstance(loop_raw["weights"], (dict, list, tuple)):
        w = loop_raw["weights"]
        loop_raw["weights"] = ScoreWeights(**w) if isinstance(w, dict) else ScoreWeights(*w)
    if "predictor" in loop_raw and isinstance(loop_raw["predictor"], dict):
        loop_raw["predictor"] = _build(PredictorConfig, loop_raw["predictor"], "loop.predictor")
    loop = _build(LoopConfig, loop_raw, "loop")

    ds_raw = raw.get("dataset") or {}
    synthetic, data_path = None, None
    if "path" in ds_raw:
        data_path = str(ds_raw["path"])
        extra = set(ds_raw) - {"path"}
        if extra:
            raise ConfigError(f"dataset: unknown keys {sorted(extra)}")
    else:
        synth_raw = dict(ds_raw.get("synthetic") or {})
        extra = set(ds_raw) - {"synthetic"}
        if extra:
            raise ConfigError(f"dataset: unknown keys {sorted(extra)}")
        synthetic = _build(SyntheticConfig, synth_raw, "dataset.synthetic")

    cfg = ExperimentConfig(
        loop=loop,
        synthetic=synthetic,
        data_path=data_path,
        out_dir=str(raw.get("out", "runs/exp")),
        experiment_id=str(raw.get("experiment", "exp")),
    )
    if "seed" in raw:
        cfg = with_seed(cfg, int(raw["seed"]))
    return cfg


def with_seed(cfg: ExperimentConfig, seed: int) -> ExperimentConfig:
    """Point every seeded component at one experiment seed."""
    loop = replace(cfg.loop, seed=seed)
    synthetic = replace(cfg.synthetic, seed=seed) if cfg.synthetic is not None else None
    return replace(cfg, loop=loop, synthetic=synthetic)


def load_config(path) -> ExperimentConfig:
    text = Path(path).read_text(encoding="utf-8")
    try:
        raw = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return config_from_dict(raw)


def config_to_dict(cfg: ExperimentConfig) -> dict:
    """Plain-dict projection embedded into exported results.

    The output directory is deliberately omitted: two runs of the same
    experiment exported to different places must produce identical
    history files.
    """
    out = {
        "experiment": cfg.experiment_id,
        "loop": dataclasses.asdict(cfg.loop),
    }
    if cfg.synthetic is not None:
        out["dataset"] = {"synthetic": dataclasses.asdict(cfg.synthetic)}
    else:
        out["dataset"] = {"path": cfg.data_path}
    return out
