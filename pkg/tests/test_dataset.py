import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bact.dataset import (
    Dataset,
    LengthMismatchError,
    MissingFileError,
    Segment,
    SyntheticConfig,
    UnknownClassNameError,
    VideoRecord,
    generate_synthetic,
    labels_from_segments,
    load_dataset,
    save_dataset,
    segments_from_labels,
)


def small_cfg(**kw):
    base = dict(
        num_videos=4,
        num_classes=3,
        feature_dim=5,
        min_segment_len=5,
        max_segment_len=12,
        mean_frames=60,
        noise_sigma=0.5,
        transition_band=2,
        class_separation=2.0,
        seed=123,
    )
    base.update(kw)
    return SyntheticConfig(**base)


class TestSegments:
    def test_run_length_example(self):
        segs = segments_from_labels([0, 0, 1, 1, 1, 2])
        assert segs == [Segment(0, 1, 2), Segment(1, 3, 5), Segment(2, 6, 6)]

    def test_single_frame(self):
        assert segments_from_labels([5]) == [Segment(5, 1, 1)]

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            segments_from_labels([])

    @given(st.lists(st.integers(min_value=0, max_value=4), min_size=1, max_size=200))
    def test_roundtrip_identity(self, labels):
        segs = segments_from_labels(labels)
        assert labels_from_segments(segs).tolist() == labels
        # adjacent segments always differ in label and tile the sequence
        for a, b in zip(segs, segs[1:]):
            assert a.label != b.label
            assert b.start == a.end + 1
        assert segs[0].start == 1
        assert segs[-1].end == len(labels)


class TestGenerateSynthetic:
    def test_deterministic_given_seed(self):
        cfg = small_cfg()
        a = generate_synthetic(cfg)
        b = generate_synthetic(cfg)
        assert [v.id for v in a.videos] == [v.id for v in b.videos]
        for va, vb in zip(a.videos, b.videos):
            assert va.features.tobytes() == vb.features.tobytes()
            assert np.array_equal(va.gt_labels, vb.gt_labels)
        assert a.train_ids == b.train_ids and a.test_ids == b.test_ids

    def test_noiseless_separable_nearest_mean(self):
        cfg = small_cfg(noise_sigma=0.0, transition_band=0, class_separation=10.0)
        ds = generate_synthetic(cfg)
        # Recover class means from labeled frames, then 1-NN classify every frame.
        means = {}
        for v in ds.videos:
            for c in np.unique(v.gt_labels):
                means.setdefault(int(c), v.features[v.gt_labels == c][0])
        for v in ds.videos:
            for t in range(v.T):
                dists = {c: np.linalg.norm(v.features[t] - m) for c, m in means.items()}
                assert min(dists, key=dists.get) == v.gt_labels[t]

    def test_total_frames_near_expected(self):
        # mean_frames is a floor the transcript sampler overshoots by less
        # than one segment, so 10 videos x 500 stays well inside +/-20%.
        for seed in range(100):
            cfg = SyntheticConfig(num_videos=10, mean_frames=500, seed=seed)
            ds = generate_synthetic(cfg)
            total = sum(v.T for v in ds.videos)
            assert 4000 <= total <= 6000

    def test_every_video_segmented(self):
        ds = generate_synthetic(small_cfg())
        for v in ds.videos:
            segs = segments_from_labels(v.gt_labels)
            assert len(segs) >= 1
            boundaries = sum(1 for a, b in zip(v.gt_labels[:-1], v.gt_labels[1:]) if a != b)
            assert boundaries == len(segs) - 1

    def test_markov_never_self_transitions(self):
        ds = generate_synthetic(small_cfg(seed=9))
        for v in ds.videos:
            for a, b in zip(segments_from_labels(v.gt_labels), segments_from_labels(v.gt_labels)[1:]):
                assert a.label != b.label

    def test_split_sizes(self):
        ds = generate_synthetic(SyntheticConfig(num_videos=75, test_fraction=0.2, seed=1))
        assert len(ds.train_ids) == 60
        assert len(ds.test_ids) == 15
        assert set(ds.train_ids).isdisjoint(ds.test_ids)

    def test_invalid_config_rejected(self):
        with pytest.raises(ValueError):
            small_cfg(min_segment_len=9, max_segment_len=3)
        with pytest.raises(ValueError):
            small_cfg(num_classes=1)
        with pytest.raises(ValueError):
            small_cfg(noise_sigma=-1.0)


class TestRecordInvariants:
    def test_label_length_mismatch(self):
        with pytest.raises(LengthMismatchError):
            VideoRecord("v", np.zeros((4, 2)), gt_labels=[0, 1, 0])

    def test_duplicate_ids_rejected(self):
        v = VideoRecord("v", np.zeros((2, 2)))
        with pytest.raises(ValueError):
            Dataset([v, VideoRecord("v", np.ones((3, 2)))], ["a", "b"])


class TestDiskRoundTrip:
    @pytest.mark.parametrize("fmt", ["feat", "csv"])
    def test_save_load_identity(self, tmp_path, fmt):
        ds = generate_synthetic(small_cfg())
        save_dataset(ds, tmp_path, feature_format=fmt)
        back = load_dataset(tmp_path)
        assert back.class_names == ds.class_names
        assert back.train_ids == ds.train_ids and back.test_ids == ds.test_ids
        assert [v.id for v in back.videos] == [v.id for v in ds.videos]
        for va, vb in zip(ds.videos, back.videos):
            np.testing.assert_array_equal(va.features, vb.features)
            np.testing.assert_array_equal(va.gt_labels, vb.gt_labels)

    def test_two_videos_three_classes(self, tmp_path):
        vids = [
            VideoRecord("a", np.zeros((3, 2)), [0, 1, 2]),
            VideoRecord("b", np.ones((2, 2)), [2, 2]),
        ]
        save_dataset(Dataset(vids, ["x", "y", "z"], ["a"], ["b"]), tmp_path)
        back = load_dataset(tmp_path)
        assert len(back.videos) == 2
        assert back.num_classes == 3

    def test_empty_dataset(self, tmp_path):
        save_dataset(Dataset([], ["x", "y"]), tmp_path)
        back = load_dataset(tmp_path)
        assert back.videos == []
        assert back.class_names == ["x", "y"]

    def test_overwrite_replaces(self, tmp_path):
        ds1 = generate_synthetic(small_cfg(seed=1))
        ds2 = generate_synthetic(small_cfg(seed=2))
        save_dataset(ds1, tmp_path)
        save_dataset(ds2, tmp_path)
        back = load_dataset(tmp_path)
        np.testing.assert_array_equal(back.videos[0].features, ds2.videos[0].features)

    def test_videos_without_ground_truth(self, tmp_path):
        save_dataset(Dataset([VideoRecord("a", np.zeros((3, 2)))], ["x", "y"], ["a"], []), tmp_path)
        back = load_dataset(tmp_path)
        assert back.videos[0].gt_labels is None


class TestLoadErrors:
    def test_missing_mapping(self, tmp_path):
        (tmp_path / "features").mkdir()
        with pytest.raises(MissingFileError):
            load_dataset(tmp_path)

    def test_label_file_longer_than_features(self, tmp_path):
        ds = Dataset([VideoRecord("vid7", np.zeros((2, 2)), [0, 1])], ["x", "y"], ["vid7"], [])
        save_dataset(ds, tmp_path)
        (tmp_path / "groundTruth" / "vid7.txt").write_text("x\ny\nx\n")
        with pytest.raises(LengthMismatchError, match="vid7"):
            load_dataset(tmp_path)

    def test_unknown_label_name(self, tmp_path):
        ds = Dataset([VideoRecord("vid7", np.zeros((2, 2)), [0, 1])], ["x", "y"], ["vid7"], [])
        save_dataset(ds, tmp_path)
        (tmp_path / "groundTruth" / "vid7.txt").write_text("x\nbogus\n")
        with pytest.raises(UnknownClassNameError, match="bogus"):
            load_dataset(tmp_path)

    def test_split_references_missing_video(self, tmp_path):
        save_dataset(Dataset([VideoRecord("a", np.zeros((2, 2)))], ["x", "y"], ["a"], []), tmp_path)
        (tmp_path / "splits" / "train.txt").write_text("a\nghost\n")
        with pytest.raises(MissingFileError, match="ghost"):
            load_dataset(tmp_path)
