"""Two-stage MSD-Kmeans outlier detection with statistical, clustering and
density baselines and a labeled evaluation harness."""

from .core import (
    Dataset,
    DetectionError,
    DetectionReport,
    DimensionMismatch,
    EmptyDataset,
    InsufficientData,
    InsufficientSurvivors,
    LengthMismatch,
    SingleStageReport,
    Stage,
    Verdict,
    VerdictClass,
    summarize,
)
from .kmeans import (
    ClusterModel,
    KMeansParams,
    cluster_thresholds,
    fit,
    fit_parallel,
    intra_distances,
    kmeans_detect,
)
from .lof import LofParams, lof_detect, lof_scores
from .metrics import ConfusionCounts, MetricsSummary, compare, evaluate, render_table
from .pipeline import MsdKmeansParams, msd_kmeans_detect, stage_breakdown
from .stats import (
    IqrParams,
    MsdParams,
    UnivariateStats,
    ZScoreParams,
    compute_stats,
    miqr_detect,
    msd_detect,
    msd_split,
    zscore_detect,
)

__version__ = "0.1.0"

__all__ = [
    "ClusterModel", "ConfusionCounts", "Dataset", "DetectionError", "DetectionReport",
    "DimensionMismatch", "EmptyDataset", "InsufficientData", "InsufficientSurvivors",
    "IqrParams", "KMeansParams", "LengthMismatch", "LofParams", "MetricsSummary",
    "MsdKmeansParams", "MsdParams", "SingleStageReport", "Stage", "UnivariateStats",
    "Verdict", "VerdictClass", "ZScoreParams", "cluster_thresholds", "compare",
    "compute_stats", "evaluate", "fit", "fit_parallel", "intra_distances", "kmeans_detect",
    "lof_detect", "lof_scores", "miqr_detect", "msd_detect", "msd_kmeans_detect",
    "msd_split", "render_table", "stage_breakdown", "summarize", "zscore_detect",
]
