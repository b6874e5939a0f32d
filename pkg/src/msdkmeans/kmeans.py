"""Lloyd K-means with per-cluster intra-distance thresholds.

The point range is always processed in fixed-size blocks. Each block yields
its labels and partial per-cluster sums, and the partials are merged in block
order. Whether blocks run on one thread or on a worker pool, the floating
point reduction is the same, so :func:`fit_parallel` is bit-identical to
:func:`fit` for any worker count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace
from typing import Optional

import numpy as np

from .core import (
    DEFAULT_SEED,
    Dataset,
    DimensionMismatch,
    InsufficientData,
    Stage,
    VerdictClass,
    make_report,
    make_rng,
    timed,
)

BLOCK_SIZE = 1 << 16
SHIFT_TOLERANCE = 1e-9


@dataclass(frozen=True)
class KMeansParams:
    k: int = 2
    seed: int = DEFAULT_SEED
    max_iterations: int = 300
    threshold_multiplier: float = 1.5
    parallel: bool = False
    workers: int = 1

    def __post_init__(self):
        if int(self.k) < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if int(self.max_iterations) < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if not self.threshold_multiplier > 0:
            raise ValueError(
                f"threshold multiplier must be positive, got {self.threshold_multiplier}"
            )
        if int(self.workers) < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")


@dataclass(frozen=True)
class ClusterStats:
    mean: float
    std: float
    threshold: float
    count: int


@dataclass(frozen=True, eq=False)
class ClusterModel:
    centroids: np.ndarray          # (k, d)
    assignments: np.ndarray        # (n,) cluster index per point, input order
    distances: np.ndarray          # (n,) distance to assigned centroid
    iterations_run: int
    converged: bool
    per_cluster: tuple[ClusterStats, ...]
    inertia_history: tuple[float, ...]
    threshold_multiplier: float

    @property
    def k(self) -> int:
        return self.centroids.shape[0]

    @property
    def thresholds(self) -> np.ndarray:
        return np.array([c.threshold for c in self.per_cluster])


class _BlockRunner:
    """Maps a per-block function over the point range, serially or on a pool."""

    def __init__(self, points: np.ndarray, workers: Optional[int]):
        self.points = points
        n = points.shape[0]
        self.bounds = [(s, min(s + BLOCK_SIZE, n)) for s in range(0, n, BLOCK_SIZE)]
        self.pool = ThreadPoolExecutor(workers) if workers and workers > 1 else None

    def map(self, fn, *args):
        blocks = [self.points[s:e] for s, e in self.bounds]
        if self.pool is None:
            return [fn(b, *args) for b in blocks]
        return list(self.pool.map(lambda b: fn(b, *args), blocks))

    def close(self):
        if self.pool is not None:
            self.pool.shutdown()


def _sq_distances(block: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    diff = block[:, None, :] - centroids[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def _assign_block(block, centroids):
    sq = _sq_distances(block, centroids)
    # argmin returns the first minimum, so ties go to the lowest cluster index
    labels = np.argmin(sq, axis=1)
    return labels, sq[np.arange(len(labels)), labels]


def _partial_sums(block, labels, k):
    counts = np.bincount(labels, minlength=k)
    sums = np.stack(
        [np.bincount(labels, weights=block[:, j], minlength=k) for j in range(block.shape[1])],
        axis=1,
    )
    return counts, sums


def _update_block(block, centroids, k):
    labels, sq = _assign_block(block, centroids)
    counts, sums = _partial_sums(block, labels, k)
    return labels, sq, counts, sums


def _merge(parts):
    total = parts[0]
    for p in parts[1:]:
        total = total + p
    return total


def _init_centroids(points: np.ndarray, k: int, seed: int) -> np.ndarray:
    rng = make_rng(seed)
    picks = rng.choice(points.shape[0], size=k, replace=False)
    return points[picks].copy()


def _repair_empty(labels, sq, counts):
    """Give each empty cluster the farthest member of the currently largest cluster."""
    for j in range(len(counts)):
        if counts[j] > 0:
            continue
        big = int(np.argmax(counts))
        members = np.flatnonzero(labels == big)
        far = members[int(np.argmax(sq[members]))]
        labels[far] = j
        sq[far] = 0.0
        counts[big] -= 1
        counts[j] += 1
    return labels


def _lloyd(points: np.ndarray, params: KMeansParams, workers: Optional[int]) -> ClusterModel:
    n = points.shape[0]
    k = int(params.k)
    if n < k:
        raise InsufficientData(f"K-means needs at least k={k} points, got {n}")

    runner = _BlockRunner(points, workers)
    try:
        centroids = _init_centroids(points, k, params.seed)
        labels: Optional[np.ndarray] = None
        inertia: list[float] = []
        converged = False
        iterations = 0
        while iterations < params.max_iterations:
            iterations += 1
            parts = runner.map(_update_block, centroids, k)
            new_labels = np.concatenate([p[0] for p in parts])
            sq = np.concatenate([p[1] for p in parts])
            counts = _merge([p[2] for p in parts])
            sums = _merge([p[3] for p in parts])
            if np.any(counts == 0):
                new_labels = _repair_empty(new_labels, sq, counts.copy())
                # recompute sums in block order rather than patching them
                parts = [_partial_sums(points[s:e], new_labels[s:e], k)
                         for s, e in runner.bounds]
                counts = _merge([p[0] for p in parts])
                sums = _merge([p[1] for p in parts])
            if labels is not None and np.array_equal(new_labels, labels):
                converged = True
                break
            labels = new_labels
            new_centroids = sums / counts[:, None]
            shift = float(np.max(np.abs(new_centroids - centroids)))
            centroids = new_centroids
            inertia.append(_inertia(runner, labels, centroids))
            if shift <= SHIFT_TOLERANCE:
                converged = True
                break

        sq_parts = runner.map(_labelled_sq, centroids)
    finally:
        runner.close()

    # labels were assigned against the previous centroids; recompute their
    # squared distances against the final centroids, per block order
    sq = np.concatenate(sq_parts)
    dist = np.sqrt(sq[np.arange(n), labels])
    per_cluster = _cluster_stats(dist, labels, k, params.threshold_multiplier)
    return ClusterModel(
        centroids=_frozen(centroids),
        assignments=_frozen(labels.astype(np.int64)),
        distances=_frozen(dist),
        iterations_run=iterations,
        converged=converged,
        per_cluster=per_cluster,
        inertia_history=tuple(inertia),
        threshold_multiplier=float(params.threshold_multiplier),
    )


def _labelled_sq(block, centroids):
    return _sq_distances(block, centroids)


def _inertia(runner: _BlockRunner, labels, centroids) -> float:
    """Within-cluster sum of squares of ``labels`` under ``centroids``."""
    total = 0.0
    for (s, e), part in zip(runner.bounds, runner.map(_labelled_sq, centroids)):
        total += float(np.sum(part[np.arange(e - s), labels[s:e]]))
    return total


def _frozen(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


def _cluster_stats(dist, labels, k, t) -> tuple[ClusterStats, ...]:
    out = []
    for j in range(k):
        d = dist[labels == j]
        if d.size == 0:
            out.append(ClusterStats(0.0, 0.0, 0.0, 0))
            continue
        mu = float(np.mean(d))
        sigma = float(np.sqrt(np.mean((d - mu) ** 2)))
        out.append(ClusterStats(mu, sigma, mu + t * sigma, int(d.size)))
    return tuple(out)


def fit(data: Dataset, params: KMeansParams = KMeansParams()) -> ClusterModel:
    """Serial Lloyd iterations from a seeded random choice of k distinct points."""
    return _lloyd(data.points, params, workers=None)


def fit_parallel(data: Dataset, params: KMeansParams = KMeansParams()) -> ClusterModel:
    """Same result as :func:`fit`, with assignment blocks spread over ``params.workers`` threads."""
    return _lloyd(data.points, params, workers=int(params.workers))


def intra_distances(model: ClusterModel, data: Dataset) -> np.ndarray:
    if data.dimension != model.centroids.shape[1]:
        raise DimensionMismatch(
            f"data has dimension {data.dimension}, model {model.centroids.shape[1]}"
        )
    if data.n != len(model.assignments):
        raise DimensionMismatch(f"model covers {len(model.assignments)} points, data has {data.n}")
    diff = data.points - model.centroids[model.assignments]
    return np.sqrt(np.einsum("ij,ij->i", diff, diff))


def cluster_thresholds(model: ClusterModel) -> np.ndarray:
    return model.thresholds


def local_outlier_mask(model: ClusterModel) -> tuple[np.ndarray, np.ndarray]:
    """Points farther from their centroid than their cluster's threshold, and scores."""
    theta = model.thresholds[model.assignments]
    d = model.distances
    mask = d > theta
    scores = np.where(theta > 0, d / np.where(theta > 0, theta, 1.0), d)
    return mask, scores


def run(data: Dataset, params: KMeansParams) -> ClusterModel:
    return fit_parallel(data, params) if params.parallel else fit(data, params)


def model_details(model: ClusterModel) -> dict:
    return {
        "centroids": model.centroids.tolist(),
        "thresholds": model.thresholds.tolist(),
        "cluster_sizes": [c.count for c in model.per_cluster],
        "iterations": model.iterations_run,
        "converged": model.converged,
    }


@timed
def kmeans_detect(data: Dataset, params: KMeansParams = KMeansParams()):
    model = run(data, params)
    mask, scores = local_outlier_mask(model)
    classes = np.where(mask, int(VerdictClass.LOCAL_OUTLIER), int(VerdictClass.NORMAL))
    stages = np.full(data.n, int(Stage.SINGLE))
    return make_report("kmeans", data, classes, stages, scores, asdict(params),
                       details=model_details(model))


def with_parallel(params: KMeansParams, workers: int) -> KMeansParams:
    return replace(params, parallel=True, workers=workers)
