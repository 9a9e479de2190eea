# Anatomy of one selection round: train on a tiny seed set, look at a single
# pool video, and print every detected boundary with its score components.

import numpy as np

from bact.acquisition import ScoreWeights, score_boundaries, select_top_k_boundaries
from bact.dataset import SyntheticConfig, generate_synthetic
from bact.predictor import PredictorConfig, mc_sample, mean_probs, train
from bact.uncertainty import frame_uncertainties

ds = generate_synthetic(SyntheticConfig(
    num_videos=12, num_classes=5, feature_dim=12, mean_frames=300,
    noise_sigma=1.5, class_separation=1.5, seed=3))

# seed labels: every 25th frame of the first two train videos
labeled = []
for vid in ds.train_ids[:2]:
    video = ds.video(vid)
    labeled += [(vid, t, int(video.gt_labels[t - 1])) for t in range(1, video.T + 1, 25)]
model = train(ds, labeled, PredictorConfig(lr=0.3, epochs=60))
print(f"trained on {len(labeled)} frames, final loss {model.loss_trace[-1]:.3f}")

vid = ds.train_ids[2]
video = ds.video(vid)
samples = mc_sample(model, video, S=10, seed=0)
mean = mean_probs(samples).probs
u = frame_uncertainties(samples, "entropy")
pred = np.argmax(mean, axis=1)

weights = ScoreWeights(0.2, 0.3, 0.5)
cands = score_boundaries(vid, pred, mean, u, clip_len=20, weights=weights)
picked = {q.center for q in select_top_k_boundaries(cands, 5, 20, {vid: video.T},
                                                    min_separation=20)}

true_b = set((np.flatnonzero(np.diff(video.gt_labels)) + 2).tolist())
print(f"\nvideo {vid}: {len(cands)} predicted boundaries, "
      f"{len(true_b)} true ones")
print(f"{'frame':>6} {'u_local':>8} {'1-gap':>7} {'grad':>7} {'fused':>7} "
      f"{'picked':>7} {'near true':>10}")
for c in sorted(cands, key=lambda c: c.b):
    near = min(abs(c.b - t) for t in true_b)
    print(f"{c.b:>6} {c.u_local:>8.3f} {1 - c.gap:>7.3f} {c.grad:>7.3f} "
          f"{c.fused:>7.3f} {'*' if c.b in picked else '':>7} {near:>10}")

# crude uncertainty strip, one char per 4 frames
levels = " .:-=+*#%@"
bins = u[: video.T // 4 * 4].reshape(-1, 4).mean(axis=1)
idx = np.minimum((bins / (u.max() + 1e-12) * (len(levels) - 1)).astype(int),
                 len(levels) - 1)
print("\nuncertainty over time (4 frames/char):")
print("".join(levels[i] for i in idx))
print("".join("^" if any(abs(4 * i + 2 - b) <= 2 for b in true_b) else " "
              for i in range(len(bins))) + "  (^ = true boundary)")
