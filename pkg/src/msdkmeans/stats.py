"""Single-stage statistical detectors: the MSD fence, Z-score and quartile fence.

All three work per dimension; a multivariate point is an outlier when any of
its coordinates falls outside that dimension's fence, and its score is the
largest per-dimension score.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .core import (
    Dataset,
    EmptyDataset,
    InsufficientData,
    Stage,
    VerdictClass,
    make_report,
    timed,
)


@dataclass(frozen=True)
class MsdParams:
    multiplier: float = 1.0

    def __post_init__(self):
        if not self.multiplier > 0:
            raise ValueError(f"MSD multiplier must be positive, got {self.multiplier}")


@dataclass(frozen=True)
class ZScoreParams:
    threshold: float = 3.0

    def __post_init__(self):
        if not self.threshold > 0:
            raise ValueError(f"z threshold must be positive, got {self.threshold}")


@dataclass(frozen=True)
class IqrParams:
    multiplier: float = 1.5

    def __post_init__(self):
        if not self.multiplier > 0:
            raise ValueError(f"IQR multiplier must be positive, got {self.multiplier}")


@dataclass(frozen=True)
class UnivariateStats:
    mu: float
    sigma: float
    n: int


def compute_stats(values) -> UnivariateStats:
    """Mean and population (divisor ``n``) standard deviation."""
    x = np.asarray(values, dtype=np.float64).reshape(-1)
    if x.size == 0:
        raise EmptyDataset("cannot compute statistics of an empty sequence")
    if not np.all(np.isfinite(x)):
        raise ValueError("values must be finite")
    mu = float(np.mean(x))
    # np.mean can land one ulp off the data range for constant input
    if x[0] == x.min() == x.max():
        return UnivariateStats(float(x[0]), 0.0, int(x.size))
    sigma = float(np.sqrt(np.mean((x - mu) ** 2)))
    return UnivariateStats(mu, sigma, int(x.size))


def _column_stats(points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    stats = [compute_stats(points[:, j]) for j in range(points.shape[1])]
    return np.array([s.mu for s in stats]), np.array([s.sigma for s in stats])


def _standardized(points, mu, sigma) -> np.ndarray:
    dev = np.abs(points - mu)
    safe = np.where(sigma > 0, sigma, 1.0)
    return np.where(sigma > 0, dev / safe, 0.0)


def msd_mask(data: Dataset, params: MsdParams) -> tuple[np.ndarray, np.ndarray]:
    """Boolean outlier mask and scores for the mean/standard-deviation fence."""
    if data.n < 2:
        raise InsufficientData(f"MSD needs at least 2 points, got {data.n}")
    mu, sigma = _column_stats(data.points)
    lo = mu - params.multiplier * sigma
    hi = mu + params.multiplier * sigma
    # points on the fence itself count as normal
    outside = (data.points < lo) | (data.points > hi)
    mask = outside.any(axis=1)
    scores = _standardized(data.points, mu, sigma).max(axis=1)
    return mask, scores


def _single_stage_report(name, data, mask, scores, params, cls=VerdictClass.GLOBAL_OUTLIER,
                         details=None):
    classes = np.where(mask, int(cls), int(VerdictClass.NORMAL))
    stages = np.full(data.n, int(Stage.SINGLE))
    return make_report(name, data, classes, stages, scores, params, details=details)


@timed
def msd_detect(data: Dataset, params: MsdParams = MsdParams()):
    mask, scores = msd_mask(data, params)
    mu, sigma = _column_stats(data.points)
    details = {"mean": mu.tolist(), "std": sigma.tolist()}
    return _single_stage_report("msd", data, mask, scores, asdict(params), details=details)


def msd_split(data: Dataset, params: MsdParams = MsdParams()) -> tuple[Dataset, Dataset]:
    """Partition ``data`` into (normals, outliers); both keep their original indices."""
    mask, _ = msd_mask(data, params)
    return data.subset(~mask), data.subset(mask)


@timed
def zscore_detect(data: Dataset, params: ZScoreParams = ZScoreParams()):
    if data.n < 2:
        raise InsufficientData(f"Z-score needs at least 2 points, got {data.n}")
    mu, sigma = _column_stats(data.points)
    z = _standardized(data.points, mu, sigma)
    mask = (z > params.threshold).any(axis=1)
    return _single_stage_report("zscore", data, mask, z.max(axis=1), asdict(params))


def quartiles(values) -> tuple[float, float]:
    """25th and 75th percentiles by linear interpolation between closest ranks."""
    q1, q3 = np.percentile(np.asarray(values, dtype=np.float64), [25, 75], method="linear")
    return float(q1), float(q3)


@timed
def miqr_detect(data: Dataset, params: IqrParams = IqrParams()):
    """Quartile fence ``[Q1 - k*IQR, Q3 + k*IQR]``.

    Score is the distance beyond the nearer fence, zero inside it.
    """
    if data.n < 4:
        raise InsufficientData(f"MIQR needs at least 4 points, got {data.n}")
    scores = np.zeros(data.n)
    mask = np.zeros(data.n, dtype=bool)
    fences = []
    for j in range(data.dimension):
        x = data.points[:, j]
        q1, q3 = quartiles(x)
        iqr = q3 - q1
        lo, hi = q1 - params.multiplier * iqr, q3 + params.multiplier * iqr
        fences.append([lo, hi])
        beyond = np.maximum(lo - x, x - hi)
        mask |= beyond > 0
        scores = np.maximum(scores, np.maximum(beyond, 0.0))
    return _single_stage_report("miqr", data, mask, scores, asdict(params),
                                details={"fences": fences})

