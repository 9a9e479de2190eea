import json
import subprocess
import sys
from pathlib import Path

import pytest

from bact.cli import main
from bact.dataset import load_dataset

CFG = """
experiment: cli-test
seed: 6
dataset:
  synthetic:
    num_videos: 8
    num_classes: 3
    feature_dim: 6
    min_segment_len: 12
    max_segment_len: 25
    mean_frames: 100
    noise_sigma: 0.5
    transition_band: 3
loop:
  rounds: 2
  budget: 16
  n_query: 1
  clips_per_video: 3
  clip_len: 10
  n_init: 2
  init_clips: 3
  predictor:
    context_radius: 2
    epochs: 8
    lr: 0.2
"""


@pytest.fixture()
def cfg_path(tmp_path):
    p = tmp_path / "cfg.yaml"
    p.write_text(CFG)
    return p


class TestGenData:
    def test_writes_loadable_dataset(self, cfg_path, tmp_path):
        out = tmp_path / "data"
        rc = main(["gen-data", "--config", str(cfg_path), "--out", str(out)])
        assert rc == 0
        ds = load_dataset(out)
        assert len(ds.videos) == 8
        assert len(ds.class_names) == 3
        assert (out / "mapping.txt").exists()
        assert (out / "splits" / "train.txt").exists()

    def test_seed_changes_data(self, cfg_path, tmp_path):
        a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
        main(["gen-data", "--config", str(cfg_path), "--out", str(a), "--seed", "1"])
        main(["gen-data", "--config", str(cfg_path), "--out", str(b), "--seed", "1"])
        main(["gen-data", "--config", str(cfg_path), "--out", str(c), "--seed", "2"])
        va = sorted(p.name for p in (a / "features").iterdir())
        assert va == sorted(p.name for p in (b / "features").iterdir())
        first = va[0]
        assert (a / "features" / first).read_bytes() == (b / "features" / first).read_bytes()
        assert (a / "features" / first).read_bytes() != (c / "features" / first).read_bytes()


class TestRun:
    def test_exports_history(self, cfg_path, tmp_path, capsys):
        out = tmp_path / "run1"
        rc = main(["run", "--config", str(cfg_path), "--out", str(out)])
        assert rc == 0
        assert (out / "history.json").exists()
        assert (out / "history.csv").exists()
        assert (out / "selections.json").exists()
        text = capsys.readouterr().out
        assert "round 1" in text

        data = json.loads((out / "history.json").read_text())
        assert data["schema_version"] == 1
        assert data["rounds"]
        assert data["config"]["experiment"] == "cli-test"

    def test_byte_identical_reruns(self, cfg_path, tmp_path):
        out1, out2 = tmp_path / "r1", tmp_path / "r2"
        main(["run", "--config", str(cfg_path), "--out", str(out1)])
        main(["run", "--config", str(cfg_path), "--out", str(out2)])
        h1 = (out1 / "history.json").read_bytes()
        h2 = (out2 / "history.json").read_bytes()
        assert h1 == h2

    def test_seed_override_changes_history(self, cfg_path, tmp_path):
        out1, out2 = tmp_path / "s1", tmp_path / "s2"
        main(["run", "--config", str(cfg_path), "--out", str(out1), "--seed", "1"])
        main(["run", "--config", str(cfg_path), "--out", str(out2), "--seed", "2"])
        assert (out1 / "history.json").read_bytes() != (out2 / "history.json").read_bytes()

    def test_strategy_and_acq_flags(self, cfg_path, tmp_path):
        out = tmp_path / "rand"
        rc = main(
            [
                "run",
                "--config",
                str(cfg_path),
                "--out",
                str(out),
                "--strategy",
                "random",
                "--acq-fn",
                "bald",
            ]
        )
        assert rc == 0
        data = json.loads((out / "history.json").read_text())
        assert data["config"]["loop"]["clip_strategy"] == "random"
        assert data["config"]["loop"]["acquisition"] == "bald"

    def test_budget_pct(self, cfg_path, tmp_path):
        out = tmp_path / "pct"
        main(["run", "--config", str(cfg_path), "--out", str(out), "--budget-pct", "2.0"])
        data = json.loads((out / "history.json").read_text())
        budget = data["config"]["loop"]["budget"]
        assert budget >= 6  # never below the initialization cost
        for r in data["rounds"]:
            assert r["labeled_after"] <= budget


class TestSweep:
    def test_clip_len_axis(self, cfg_path, tmp_path):
        out = tmp_path / "sweep"
        rc = main(
            [
                "sweep",
                "--config",
                str(cfg_path),
                "--out",
                str(out),
                "--axis",
                "clip-len",
            ]
        )
        assert rc == 0
        rows = (out / "sweep.csv").read_text().strip().splitlines()
        assert len(rows) == 1 + 6  # header + one per clip length
        data = json.loads((out / "sweep.json").read_text())
        lens = [r["overrides"]["clip_len"] for r in data["rows"]]
        assert lens == [0, 10, 20, 30, 40, 50]
        for r in data["rows"]:
            assert r["report"] is not None


class TestEval:
    def test_perfect_predictions(self, cfg_path, tmp_path, capsys):
        data_dir = tmp_path / "data"
        main(["gen-data", "--config", str(cfg_path), "--out", str(data_dir)])
        ds = load_dataset(data_dir)
        pred_dir = tmp_path / "preds"
        pred_dir.mkdir()
        for vid in ds.test_ids:
            video = ds.video(vid)
            names = [ds.class_names[c] for c in video.gt_labels]
            (pred_dir / f"{vid}.txt").write_text("\n".join(names) + "\n")
        report_path = tmp_path / "report.json"
        rc = main(
            [
                "eval",
                "--data",
                str(data_dir),
                "--pred",
                str(pred_dir),
                "--out",
                str(report_path),
            ]
        )
        assert rc == 0
        report = json.loads(report_path.read_text())
        assert report["acc"] == 100.0
        assert report["edit"] == 100.0
        assert report["f1_50"] == 100.0


class TestEntryPoint:
    def test_console_script_help(self):
        proc = subprocess.run(
            [sys.executable, "-m", "bact.cli", "--help"], capture_output=True, text=True
        )
        assert proc.returncode == 0
        for sub in ("run", "sweep", "serve", "eval", "gen-data"):
            assert sub in proc.stdout

    def test_installed_script(self):
        proc = subprocess.run(["bact", "--help"], capture_output=True, text=True)
        assert proc.returncode == 0
