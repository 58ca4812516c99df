"""Transductive few-shot open-set recognition on precomputed features.

The main entry point is :func:`oslo.solver.solve`, which jointly infers
class assignments and per-sample inlierness scores for the queries of one
episode. Inductive baselines, rank-based metrics, episode samplers and
cluster diagnostics live in the sibling modules.
"""

from .baselines import (
    KnnConfig,
    knn_outlier_score,
    max_prob_outlierness,
    knn_classify,
    nearest_centroid_classify,
    simpleshot_maxprob,
    strong_baseline,
)
from .diagnostics import imposture_factor, mean_imposture_factor, per_class_imposture, variance_ratio
from .episodes import (
    SyntheticSpec,
    audit_episode,
    generate_synthetic_dataset,
    sample_episode,
    sample_episode_broad,
)
from .io import load_features, load_splits, write_features
from .metrics import ScoredQuerySet, aggregate, aupr, auroc, accuracy, evaluate, precision_at_recall
from .preprocess import (
    CenteringMode,
    center_normalize,
    compute_base_center,
    compute_task_center,
    normalize_episode,
)
from .solver import solve
from .types import (
    OUTLIER,
    Dataset,
    Episode,
    EpisodeSpec,
    FeatureRecord,
    MetricsReport,
    PredictionResult,
    SolverConfig,
    SolverState,
    validate_dataset,
)

__version__ = "0.1.0"
