import dataclasses

import numpy as np
import pytest

from bact.acquisition import ScoreWeights
from bact.dataset import SyntheticConfig, generate_synthetic
from bact.loop import (
    CLIP_LENGTH_GRID,
    LabeledIndexSet,
    LoopConfig,
    LoopState,
    init_pools,
    run_experiment,
    run_round,
    sweep,
    weight_grid,
)
from bact.predictor import PredictorConfig

SMALL = SyntheticConfig(
    num_videos=12,
    num_classes=4,
    feature_dim=8,
    min_segment_len=15,
    max_segment_len=35,
    mean_frames=150,
    noise_sigma=0.6,
    transition_band=4,
    class_separation=2.0,
    seed=21,
)

FAST_PRED = PredictorConfig(context_radius=2, epochs=15, lr=0.2, batch_size=64)


def small_cfg(**kw):
    base = dict(
        rounds=3,
        budget=29,
        n_query=2,
        clips_per_video=3,
        clip_len=10,
        n_init=3,
        init_clips=4,
        predictor=FAST_PRED,
        seed=5,
    )
    base.update(kw)
    return LoopConfig(**base)


@pytest.fixture(scope="module")
def ds():
    return generate_synthetic(SMALL)


class TestLabeledIndexSet:
    def test_add_and_lookup(self):
        s = LabeledIndexSet()
        s.add("v", 3, 1)
        assert len(s) == 1
        assert ("v", 3) in s
        assert s.label_of("v", 3) == 1

    def test_duplicate_rejected(self):
        s = LabeledIndexSet()
        s.add("v", 3, 1)
        with pytest.raises(ValueError):
            s.add("v", 3, 2)

    def test_triples_sorted(self):
        s = LabeledIndexSet()
        s.add("b", 9, 0)
        s.add("a", 2, 1)
        s.add("a", 1, 2)
        assert s.triples() == [("a", 1, 2), ("a", 2, 1), ("b", 9, 0)]

    def test_frames_of(self):
        s = LabeledIndexSet()
        s.add("v", 5, 0)
        s.add("v", 2, 0)
        s.add("w", 1, 0)
        assert s.frames_of("v") == [2, 5]


class TestInitPools:
    def test_counts(self, ds):
        cfg = small_cfg()
        d_l, d_u, omega = init_pools(ds, cfg)
        assert len(d_l) == 3
        assert len(omega) == 12  # n_init * init_clips
        assert d_l | d_u == set(ds.train_ids)
        assert not d_l & d_u

    def test_deterministic(self, ds):
        cfg = small_cfg()
        a = init_pools(ds, cfg)
        b = init_pools(ds, cfg)
        assert a[0] == b[0]
        assert a[2].triples() == b[2].triples()

    def test_labels_match_ground_truth(self, ds):
        _, _, omega = init_pools(ds, small_cfg())
        for vid, frame, label in omega.triples():
            assert label == int(ds.video(vid).gt_labels[frame - 1])

    def test_all_videos_empties_pool(self, ds):
        n = len(ds.train_ids)
        cfg = small_cfg(n_init=n, budget=4 * n)
        d_l, d_u, _ = init_pools(ds, cfg)
        assert d_u == set()

    def test_n_init_too_large(self, ds):
        with pytest.raises(ValueError):
            init_pools(ds, small_cfg(n_init=100, budget=500))


class TestRunRound:
    def test_full_round_accounting(self, ds):
        cfg = small_cfg()
        d_l, d_u, omega = init_pools(ds, cfg)
        state = LoopState(ds, d_l, d_u, omega)
        state, hist = run_round(state, cfg)
        assert hist.round_index == 1
        assert hist.labeled_before == 12
        assert hist.labeled_after == len(state.omega)
        assert hist.labeled_after - hist.labeled_before <= cfg.n_query * cfg.clips_per_video
        assert len(hist.queried_videos) == cfg.n_query
        assert set(hist.queried_videos) <= state.d_labeled
        assert not set(hist.queried_videos) & state.d_unlabeled

    def test_budget_guard_stops(self, ds):
        cfg = small_cfg(budget=13)  # 12 init + 6 planned > 13
        d_l, d_u, omega = init_pools(ds, cfg)
        state = LoopState(ds, d_l, d_u, omega)
        _, hist = run_round(state, cfg)
        assert hist.stop_reason == "budget"
        assert hist.labeled_after == hist.labeled_before == 12
        assert hist.queries == ()

    def test_empty_pool_stops(self, ds):
        n = len(ds.train_ids)
        cfg = small_cfg(n_init=n, budget=4 * n + 50)
        d_l, d_u, omega = init_pools(ds, cfg)
        state = LoopState(ds, d_l, d_u, omega)
        _, hist = run_round(state, cfg)
        assert hist.stop_reason == "pool_exhausted"

    def test_annotator_failure_is_atomic(self, ds):
        cfg = small_cfg()
        d_l, d_u, omega = init_pools(ds, cfg)
        state = LoopState(ds, d_l, d_u, omega)
        before_triples = omega.triples()
        before_pool = set(state.d_unlabeled)

        def broken(queries):
            raise RuntimeError("annotator offline")

        with pytest.raises(RuntimeError):
            run_round(state, cfg, annotate=broken)
        assert state.omega.triples() == before_triples
        assert state.d_unlabeled == before_pool

    def test_labels_recorded_verbatim(self, ds):
        cfg = small_cfg()
        d_l, d_u, omega = init_pools(ds, cfg)
        state = LoopState(ds, d_l, d_u, omega)
        seen = {}

        def scripted(queries):
            out = {}
            for q in queries:
                out[(q.video_id, q.frame)] = (q.frame * 7) % 4
            seen.update(out)
            return out

        state, _ = run_round(state, cfg, annotate=scripted)
        for key, label in seen.items():
            assert state.omega.label_of(*key) == label


class TestRunExperiment:
    def test_zero_rounds(self, ds):
        assert run_experiment(ds, small_cfg(rounds=0)) == []

    def test_deterministic(self, ds):
        cfg = small_cfg()
        a = run_experiment(ds, cfg)
        b = run_experiment(ds, cfg)
        assert [h.to_dict() for h in a] == [h.to_dict() for h in b]

    def test_monotone_and_bounded(self, ds):
        cfg = small_cfg()
        history = run_experiment(ds, cfg)
        assert history
        labeled = [h.labeled_before for h in history] + [history[-1].labeled_after]
        assert labeled == sorted(labeled)
        for h in history:
            assert h.labeled_after <= cfg.budget
            assert h.labeled_after - h.labeled_before <= cfg.n_query * cfg.clips_per_video

    def test_accounting_balances(self, ds):
        cfg = small_cfg()
        history = run_experiment(ds, cfg)
        init = history[0].labeled_before
        acquired = sum(h.labeled_after - h.labeled_before for h in history)
        assert init + acquired == history[-1].labeled_after
        assert init == cfg.n_init * cfg.init_clips

    def test_stop_reason_present(self, ds):
        history = run_experiment(ds, small_cfg())
        assert history[-1].stop_reason in ("rounds_done", "budget", "pool_exhausted")
        for h in history[:-1]:
            assert h.stop_reason is None

    def test_budget_stop_flagged(self, ds):
        cfg = small_cfg(rounds=10, budget=20)  # room for one full query round
        history = run_experiment(ds, cfg)
        assert history[-1].stop_reason == "budget"
        assert history[-1].labeled_after <= 20

    def test_random_strategies_also_run(self, ds):
        cfg = small_cfg(video_strategy="random", clip_strategy="random")
        history = run_experiment(ds, cfg)
        assert history[-1].labeled_after <= cfg.budget
        assert len(history) >= 1

    @pytest.mark.parametrize("strategy", ["entropy", "equidistant", "split_random", "split_entropy", "coreset"])
    def test_every_clip_strategy_runs(self, ds, strategy):
        cfg = small_cfg(rounds=2, clip_strategy=strategy)
        history = run_experiment(ds, cfg)
        assert history
        for h in history:
            for rec in h.queries:
                assert rec["strategy"] in (strategy, "split_entropy_fill")

    @pytest.mark.parametrize("fn", ["bald", "power_bald", "jsd", "variation_ratio"])
    def test_every_acquisition_runs(self, ds, fn):
        cfg = small_cfg(rounds=2, acquisition=fn)
        assert run_experiment(ds, cfg)

    def test_label_noise_changes_labels_not_budget(self, ds):
        clean = run_experiment(ds, small_cfg())
        noisy = run_experiment(ds, small_cfg(label_noise=0.8))
        assert clean[-1].labeled_after == noisy[-1].labeled_after

    def test_query_records_have_score_components(self, ds):
        history = run_experiment(ds, small_cfg())
        recs = [r for h in history for r in h.queries if r["strategy"] == "boundary"]
        assert recs
        for r in recs:
            assert {"video", "center", "lo", "hi", "fused", "u_local", "gap", "grad"} <= set(r)


class TestSweep:
    def test_grid_of_one_matches_single_run(self, ds):
        cfg = small_cfg(rounds=2)
        rows = sweep(ds, cfg, {"clip_len": [10]})
        single = run_experiment(ds, dataclasses.replace(cfg, clip_len=10))
        assert len(rows) == 1
        assert rows[0][0] == {"clip_len": 10}
        assert rows[0][1].to_dict() == single[-1].report.to_dict()

    def test_clip_length_axis_cardinality(self, ds):
        cfg = small_cfg(rounds=1)
        rows = sweep(ds, cfg, {"clip_len": list(CLIP_LENGTH_GRID)})
        assert len(rows) == len(CLIP_LENGTH_GRID) == 6

    def test_weight_tuples_accepted(self, ds):
        cfg = small_cfg(rounds=1)
        rows = sweep(ds, cfg, {"weights": [(0.2, 0.3, 0.5), (0.0, 0.4, 0.6)]})
        assert len(rows) == 2


class TestWeightGrid:
    def test_all_rows_sum_to_one(self):
        grid = weight_grid()
        for a, b, g in grid:
            assert a + b + g == pytest.approx(1.0, abs=1e-9)

    def test_search_box(self):
        grid = weight_grid()
        assert len(grid) == 15
        for a, b, g in grid:
            assert a <= 0.4 + 1e-9 and b <= 0.4 + 1e-9 and g <= 0.6 + 1e-9
        assert (0.2, 0.3, 0.5) in [(round(a, 1), round(b, 1), round(g, 1)) for a, b, g in grid]


class TestConfigValidation:
    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(rounds=-1),
            dict(budget=0),
            dict(budget=10, n_init=3, init_clips=4),
            dict(video_strategy="oracle"),
            dict(clip_strategy="dtw"),
            dict(acquisition="margin"),
            dict(label_noise=1.5),
            dict(clip_len=-1),
        ],
    )
    def test_rejects(self, kwargs):
        with pytest.raises(ValueError):
            LoopConfig(**kwargs)
