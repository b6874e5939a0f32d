"""Two-stage MSD-Kmeans detector.

Stage 1 fences out global outliers with the mean/standard-deviation rule.
Stage 2 clusters the survivors with K-means and flags, inside each cluster,
the points whose distance to the centroid exceeds ``mean + t * std`` of that
cluster's distances. Removed points never influence the stage-2 thresholds.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import asdict, dataclass, field

import numpy as np

from . import kmeans as km
from .core import (
    Dataset,
    DetectionReport,
    InsufficientData,
    InsufficientSurvivors,
    SingleStageReport,
    Stage,
    VerdictClass,
    make_report,
    timed,
)
from .stats import MsdParams, msd_mask


@dataclass(frozen=True)
class MsdKmeansParams:
    msd: MsdParams = field(default_factory=MsdParams)
    kmeans: km.KMeansParams = field(default_factory=km.KMeansParams)


@timed
def msd_kmeans_detect(data: Dataset, params: MsdKmeansParams = MsdKmeansParams()):
    if data.n < 2:
        raise InsufficientData(f"MSD-Kmeans needs at least 2 points, got {data.n}")
    removed, msd_scores = msd_mask(data, params.msd)
    survivors = data.subset(~removed)
    k = int(params.kmeans.k)
    if survivors.n < k:
        raise InsufficientSurvivors(int(removed.sum()), survivors.n, k)

    model = km.run(survivors, params.kmeans)
    local, local_scores = km.local_outlier_mask(model)

    classes = np.full(data.n, int(VerdictClass.NORMAL), dtype=np.int8)
    stages = np.full(data.n, int(Stage.KMEANS), dtype=np.int8)
    scores = np.empty(data.n)

    classes[removed] = VerdictClass.GLOBAL_OUTLIER
    stages[removed] = Stage.MSD
    scores[removed] = msd_scores[removed]

    kept = np.flatnonzero(~removed)
    classes[kept[local]] = VerdictClass.LOCAL_OUTLIER
    scores[kept] = local_scores

    details = km.model_details(model)
    details["stage1_removed"] = int(removed.sum())
    return make_report("msd-kmeans", data, classes, stages, scores,
                       {"msd": asdict(params.msd), "kmeans": asdict(params.kmeans)},
                       details=details)


def stage_breakdown(report: DetectionReport) -> Counter:
    """Count outlier verdicts per (class, stage) for a two-stage report.

    Zero counts compare equal to missing keys, so an all-normal report gives
    an empty breakdown.
    """
    if np.any(report.stages == Stage.SINGLE):
        raise SingleStageReport(f"report from {report.detector!r} has no stage attribution")
    out = Counter()
    for cls, stage in ((VerdictClass.GLOBAL_OUTLIER, Stage.MSD),
                       (VerdictClass.LOCAL_OUTLIER, Stage.KMEANS)):
        out[(cls, stage)] = int(np.count_nonzero((report.classes == cls) & (report.stages == stage)))
    return out
