# Paired comparison of selection strategies at an identical label budget.
# Each arm sees the same datasets and seeds; only the selection policy differs.

import numpy as np

from bact.dataset import SyntheticConfig, generate_synthetic
from bact.loop import LoopConfig, run_experiment
from bact.predictor import PredictorConfig

ARMS = [
    ("uncertainty", "boundary"),
    ("uncertainty", "entropy"),
    ("uncertainty", "coreset"),
    ("random", "equidistant"),
    ("random", "random"),
]
SEEDS = range(5)

def final_report(seed, video_strategy, clip_strategy):
    ds = generate_synthetic(SyntheticConfig(
        num_videos=40, num_classes=6, feature_dim=16, mean_frames=400,
        noise_sigma=2.0, class_separation=1.5, transition_band=8, seed=seed))
    cfg = LoopConfig(rounds=4, budget=50, n_query=2, clips_per_video=5,
                     clip_len=20, n_init=4, init_clips=5,
                     video_strategy=video_strategy, clip_strategy=clip_strategy,
                     predictor=PredictorConfig(lr=0.5), seed=seed)
    return run_experiment(ds, cfg)[-1].report

print(f"{'video':>12} {'clip':>12} {'acc':>7} {'edit':>7} {'f1@50':>7}")
rows = []
for vs, cs in ARMS:
    reps = [final_report(s, vs, cs) for s in SEEDS]
    acc = np.mean([r.accuracy for r in reps])
    edit = np.mean([r.edit for r in reps])
    f150 = np.mean([r.f1[0.5][0] for r in reps])
    rows.append((vs, cs, acc, edit, f150))
    print(f"{vs:>12} {cs:>12} {acc:>7.2f} {edit:>7.2f} {f150:>7.2f}")

best = max(rows, key=lambda r: r[3])
print(f"\nbest edit score: {best[0]} video selection + {best[1]} clips "
      f"({best[3]:.2f} mean over {len(list(SEEDS))} seeds)")
