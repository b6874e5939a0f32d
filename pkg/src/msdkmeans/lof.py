"""Local Outlier Factor baseline (exact neighbour search).

Neighbourhoods are tie-inclusive: every point at exactly the k-distance
belongs to the neighbourhood, so a neighbourhood may hold more than k points.
Reachability distances are floored at ``EPSILON`` so that heavily duplicated
data keeps a finite local reachability density.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .core import (
    DEFAULT_SEED,
    Dataset,
    InsufficientData,
    Stage,
    VerdictClass,
    make_report,
    make_rng,
    timed,
)

EPSILON = 1e-12
# cap on block_rows * n * d floats held in memory at once
_BLOCK_BUDGET = 1 << 22


@dataclass(frozen=True)
class LofParams:
    k_neighbors: int = 20
    lof_threshold: float = 1.5
    sample_size: Optional[int] = None
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if int(self.k_neighbors) < 1:
            raise ValueError(f"k_neighbors must be >= 1, got {self.k_neighbors}")
        if not self.lof_threshold > 0:
            raise ValueError(f"lof_threshold must be positive, got {self.lof_threshold}")
        if self.sample_size is not None and int(self.sample_size) < 1:
            raise ValueError(f"sample_size must be >= 1, got {self.sample_size}")


def _neighbourhoods(points: np.ndarray, k: int):
    """k-distance per point plus CSR neighbour lists (indices and distances)."""
    n, d = points.shape
    rows = max(1, _BLOCK_BUDGET // max(1, n * d))
    kdist = np.empty(n)
    nbr_idx, nbr_dist, counts = [], [], np.empty(n, dtype=np.int64)
    for s in range(0, n, rows):
        e = min(s + rows, n)
        diff = points[s:e, None, :] - points[None, :, :]
        dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        dist[np.arange(e - s), np.arange(s, e)] = np.inf
        kd = np.partition(dist, k - 1, axis=1)[:, k - 1]
        kdist[s:e] = kd
        within = dist <= kd[:, None]
        r, c = np.nonzero(within)
        nbr_idx.append(c)
        nbr_dist.append(dist[r, c])
        counts[s:e] = within.sum(axis=1)
    return kdist, np.concatenate(nbr_idx), np.concatenate(nbr_dist), counts


def lof_scores(data: Dataset, params: LofParams = LofParams()) -> np.ndarray:
    n = data.n
    k = int(params.k_neighbors)
    if n <= k:
        raise InsufficientData(f"LOF needs more than k_neighbors={k} points, got {n}")
    kdist, idx, dist, counts = _neighbourhoods(data.points, k)
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
    reach = np.maximum(np.maximum(kdist[idx], dist), EPSILON)
    lrd = counts / np.add.reduceat(reach, starts)
    return np.add.reduceat(lrd[idx], starts) / counts / lrd


@timed
def lof_detect(data: Dataset, params: LofParams = LofParams()):
    """Flag points whose LOF exceeds ``params.lof_threshold``.

    With ``sample_size`` set, a seeded subsample is scored and every other
    point is reported Normal with score 0; ``report.evaluated`` marks which
    points were scored.
    """
    evaluated = None
    target = data
    echo = asdict(params)
    if params.sample_size is not None and params.sample_size < data.n:
        rng = make_rng(params.seed)
        picks = np.sort(rng.choice(data.n, size=int(params.sample_size), replace=False))
        evaluated = np.zeros(data.n, dtype=bool)
        evaluated[picks] = True
        target = data.subset(picks)
        echo["n_unsampled"] = int(data.n - picks.size)

    lof = lof_scores(target, params)
    scores = np.zeros(data.n)
    if evaluated is None:
        scores[:] = lof
    else:
        scores[evaluated] = lof
    classes = np.where(scores > params.lof_threshold,
                       int(VerdictClass.LOCAL_OUTLIER), int(VerdictClass.NORMAL))
    stages = np.full(data.n, int(Stage.SINGLE))
    return make_report("lof", data, classes, stages, scores, echo, evaluated=evaluated)
