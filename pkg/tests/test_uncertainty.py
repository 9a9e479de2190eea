import math

import numpy as np
import pytest

from bact.predictor import FrameProbs
from bact.uncertainty import (
    ACQUISITION_FNS,
    VideoScore,
    frame_uncertainties,
    predictive_entropy,
    select_videos,
    video_score,
)


def random_samples(rng, S=6, T=9, C=4, vid="v"):
    out = []
    for _ in range(S):
        raw = rng.random((T, C)) + 1e-3
        out.append(FrameProbs(vid, raw / raw.sum(axis=1, keepdims=True)))
    return out


def entropy_oracle(row):
    return -sum(p * math.log(p) for p in row if p > 0)


def jsd_pair_oracle(p, q):
    m = [(a + b) / 2 for a, b in zip(p, q)]
    kl_p = sum(a * math.log(a / mm) for a, mm in zip(p, m) if a > 0)
    kl_q = sum(b * math.log(b / mm) for b, mm in zip(q, m) if b > 0)
    return 0.5 * kl_p + 0.5 * kl_q


class TestPredictiveEntropy:
    def test_uniform_is_ln_c(self):
        for C in (2, 4, 6):
            assert predictive_entropy([1.0 / C] * C) == pytest.approx(math.log(C), abs=1e-9)

    def test_one_hot_is_zero(self):
        assert predictive_entropy([0.0, 1.0, 0.0]) == 0.0

    def test_hand_value(self):
        assert predictive_entropy([0.5, 0.3, 0.2]) == pytest.approx(1.0297, abs=5e-5)

    def test_matches_summation_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            raw = rng.random(5) + 1e-6
            row = raw / raw.sum()
            assert predictive_entropy(row) == pytest.approx(entropy_oracle(row), abs=1e-12)

    def test_bounds(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            C = int(rng.integers(2, 8))
            raw = rng.random(C)
            row = raw / raw.sum()
            h = predictive_entropy(row)
            assert -1e-12 <= h <= math.log(C) + 1e-9

    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            predictive_entropy([0.5, 0.6])


class TestFrameUncertainties:
    def test_unknown_fn(self):
        rng = np.random.default_rng(2)
        with pytest.raises(ValueError):
            frame_uncertainties(random_samples(rng), fn="softmax_margin")

    def test_empty_samples(self):
        with pytest.raises(ValueError):
            frame_uncertainties([], fn="entropy")

    def test_identical_samples_no_disagreement(self):
        rng = np.random.default_rng(3)
        one = random_samples(rng, S=1)[0]
        samples = [one] * 5
        for fn in ("bald", "jsd", "variation_ratio"):
            out = frame_uncertainties(samples, fn=fn)
            assert np.abs(out).max() < 1e-9

    def test_entropy_of_mean(self):
        rng = np.random.default_rng(4)
        samples = random_samples(rng)
        mean = np.mean([s.probs for s in samples], axis=0)
        got = frame_uncertainties(samples, fn="entropy")
        want = [entropy_oracle(row) for row in mean]
        assert np.allclose(got, want, atol=1e-12)

    def test_bald_two_opposed_one_hots(self):
        a = FrameProbs("v", np.array([[1.0, 0.0]]))
        b = FrameProbs("v", np.array([[0.0, 1.0]]))
        out = frame_uncertainties([a, b], fn="bald")
        assert out[0] == pytest.approx(math.log(2), abs=1e-9)

    def test_bald_bounds(self):
        rng = np.random.default_rng(5)
        for _ in range(30):
            samples = random_samples(rng, S=int(rng.integers(2, 8)))
            bald = frame_uncertainties(samples, fn="bald")
            mean = np.mean([s.probs for s in samples], axis=0)
            h_mean = np.array([entropy_oracle(r) for r in mean])
            assert bald.min() >= -1e-9
            assert np.all(bald <= h_mean + 1e-9)

    def test_variation_ratio_half(self):
        a = FrameProbs("v", np.array([[0.9, 0.1]]))
        b = FrameProbs("v", np.array([[0.2, 0.8]]))
        out = frame_uncertainties([a, b], fn="variation_ratio")
        assert out[0] == 0.5

    def test_jsd_matches_pairwise_oracle(self):
        rng = np.random.default_rng(6)
        samples = random_samples(rng, S=5, T=4, C=3)
        got = frame_uncertainties(samples, fn="jsd")
        T = samples[0].T
        for t in range(T):
            pairs = []
            for i in range(5):
                for j in range(i + 1, 5):
                    pairs.append(jsd_pair_oracle(samples[i].probs[t], samples[j].probs[t]))
            assert got[t] == pytest.approx(np.mean(pairs), abs=1e-9)

    def test_sample_permutation_invariance(self):
        rng = np.random.default_rng(7)
        samples = random_samples(rng, S=6)
        rev = samples[::-1]
        for fn in ACQUISITION_FNS:
            a = frame_uncertainties(samples, fn=fn, seed=13)
            b = frame_uncertainties(rev, fn=fn, seed=13)
            assert np.allclose(a, b, atol=1e-12)

    def test_power_bald_seeded_and_ranking_noise(self):
        rng = np.random.default_rng(8)
        samples = random_samples(rng, S=6)
        a = frame_uncertainties(samples, fn="power_bald", seed=1)
        b = frame_uncertainties(samples, fn="power_bald", seed=1)
        c = frame_uncertainties(samples, fn="power_bald", seed=2)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)
        with pytest.raises(ValueError):
            frame_uncertainties(samples, fn="power_bald", power_beta=0.0)

    def test_power_bald_beta_scales_noise(self):
        rng = np.random.default_rng(9)
        samples = random_samples(rng, S=6)
        lo = frame_uncertainties(samples, fn="power_bald", seed=3, power_beta=1.0)
        hi = frame_uncertainties(samples, fn="power_bald", seed=3, power_beta=1e9)
        bald = frame_uncertainties(samples, fn="bald")
        # with huge coldness the noise vanishes and the log-score remains
        assert np.allclose(hi, np.log(np.maximum(bald, 0) + 1e-12), atol=1e-6)
        assert not np.allclose(lo, hi)


class TestVideoScore:
    def test_constant(self):
        assert video_score([0.5] * 17) == 0.5

    def test_two_values(self):
        assert video_score([0.0, 1.0]) == 0.5

    def test_mean_oracle(self):
        rng = np.random.default_rng(10)
        u = rng.random(1000)
        assert video_score(u) == pytest.approx(sum(u) / 1000, abs=1e-12)

    def test_empty(self):
        with pytest.raises(ValueError):
            video_score([])


class TestSelectVideos:
    def test_top_one(self):
        scores = [VideoScore("a", 0.9), VideoScore("b", 0.1)]
        assert select_videos(scores, 1) == {"a"}

    def test_n_ge_pool(self):
        scores = [VideoScore("a", 0.9), VideoScore("b", 0.1)]
        assert select_videos(scores, 10) == {"a", "b"}

    def test_matches_sort_oracle(self):
        rng = np.random.default_rng(11)
        scores = [VideoScore(f"v{i:02d}", float(rng.random())) for i in range(50)]
        got = select_videos(scores, 5)
        want = {s.video_id for s in sorted(scores, key=lambda s: (-s.U, s.video_id))[:5]}
        assert got == want

    def test_tie_break_lexicographic(self):
        scores = [VideoScore("z", 1.0), VideoScore("a", 1.0), VideoScore("m", 0.2)]
        assert select_videos(scores, 1) == {"a"}

    def test_monotone_transform_invariance(self):
        rng = np.random.default_rng(12)
        scores = [VideoScore(f"v{i}", float(rng.random())) for i in range(20)]
        warped = [VideoScore(s.video_id, 3.0 * s.U + 1.0) for s in scores]
        assert select_videos(scores, 7) == select_videos(warped, 7)

    def test_empty_pool(self):
        with pytest.raises(ValueError):
            select_videos([], 3)

    def test_bad_n(self):
        with pytest.raises(ValueError):
            select_videos([VideoScore("a", 1.0)], 0)
