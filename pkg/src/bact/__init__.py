"""Clip-budgeted boundary-centric active learning for frame labeling."""

from .acquisition import (
    BoundaryCandidate,
    ClipQuery,
    ScoreWeights,
    baseline_select_clips,
    boundary_score,
    boundary_window,
    confidence_gap,
    coreset_select,
    detect_boundaries,
    local_uncertainty,
    score_boundaries,
    select_top_k_boundaries,
    temporal_gradient,
)
from .annotate import SessionStore, export_results, oracle_annotate
from .config import ExperimentConfig, load_config
from .dataset import (
    Dataset,
    Segment,
    SyntheticConfig,
    VideoRecord,
    generate_synthetic,
    labels_from_segments,
    load_dataset,
    save_dataset,
    segments_from_labels,
)
from .loop import (
    LabeledIndexSet,
    LoopConfig,
    RoundHistory,
    init_pools,
    run_experiment,
    run_round,
    sweep,
)
from .metrics import MetricReport, edit_score, evaluate, f1_at_overlap, frame_accuracy
from .predictor import (
    FrameProbs,
    ModelState,
    PredictorConfig,
    load_checkpoint,
    mc_sample,
    mean_probs,
    predict_probs,
    save_checkpoint,
    train,
)
from .uncertainty import (
    ACQUISITION_FNS,
    VideoScore,
    frame_uncertainties,
    predictive_entropy,
    select_videos,
    video_score,
)

__version__ = "0.1.0"
