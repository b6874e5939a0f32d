"""Shared domain types: datasets, verdicts, detection reports, errors."""

from __future__ import annotations

import enum
import functools
import json
import time
from dataclasses import dataclass, field
from typing import Any, Iterator, Mapping, NamedTuple, Optional

import numpy as np

DEFAULT_SEED = 2016


class DetectionError(Exception):
    """Base class for every error raised by this package."""


class EmptyDataset(DetectionError, ValueError):
    pass


class InsufficientData(DetectionError, ValueError):
    pass


class InsufficientSurvivors(InsufficientData):
    """Stage 1 of the two-stage detector left fewer points than clusters."""

    def __init__(self, removed: int, survivors: int, k: int):
        self.removed = removed
        self.survivors = survivors
        self.k = k
        super().__init__(
            f"{survivors} points survive the MSD stage ({removed} removed), "
            f"fewer than k={k}"
        )


class DimensionMismatch(DetectionError, ValueError):
    pass


class LengthMismatch(DetectionError, ValueError):
    pass


class SingleStageReport(DetectionError, ValueError):
    pass


class VerdictClass(enum.IntEnum):
    NORMAL = 0
    GLOBAL_OUTLIER = 1
    LOCAL_OUTLIER = 2


class Stage(enum.IntEnum):
    SINGLE = 0
    MSD = 1
    KMEANS = 2


class Verdict(NamedTuple):
    index: int
    cls: VerdictClass
    stage: Stage
    score: float


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Dataset:
    """Ordered feature vectors with stable indices and optional truth labels.

    ``points`` is an ``(n, d)`` float array. ``index`` holds the key each
    detector reports verdicts under; it defaults to ``0..n-1`` and is carried
    through subsetting so verdicts can be merged back onto the parent.
    ``labels`` is a boolean array, ``True`` meaning outlier. ``provenance``
    maps points back to source rows; ``aux`` carries per-point columns that
    ride along without being detected on (e.g. trip distance for plots).
    """

    points: np.ndarray
    index: np.ndarray
    labels: Optional[np.ndarray] = None
    provenance: Optional[np.ndarray] = None
    aux: Mapping[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2 or (pts.shape[0] > 0 and pts.shape[1] < 1):
            raise DimensionMismatch(f"points must be (n, d), got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("dataset contains non-finite values")
        idx = np.array(self.index, dtype=np.int64).reshape(-1)
        if idx.shape[0] != pts.shape[0]:
            raise LengthMismatch(f"{idx.shape[0]} indices for {pts.shape[0]} points")
        if np.unique(idx).size != idx.size:
            raise ValueError("dataset indices must be unique")
        object.__setattr__(self, "points", _readonly(pts))
        object.__setattr__(self, "index", _readonly(idx))
        if self.labels is not None:
            lab = np.array(self.labels, dtype=bool).reshape(-1)
            if lab.shape[0] != pts.shape[0]:
                raise LengthMismatch(f"{lab.shape[0]} labels for {pts.shape[0]} points")
            object.__setattr__(self, "labels", _readonly(lab))
        if self.provenance is not None:
            prov = np.array(self.provenance, dtype=np.int64).reshape(-1)
            object.__setattr__(self, "provenance", _readonly(prov))

    @classmethod
    def from_values(cls, values, labels=None, provenance=None) -> "Dataset":
        pts = np.asarray(values, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        return cls(pts, np.arange(pts.shape[0]), labels, provenance)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.n

    def subset(self, mask_or_positions) -> "Dataset":
        """Select rows by boolean mask or positions, keeping their indices."""
        sel = np.asarray(mask_or_positions)
        labels = None if self.labels is None else self.labels[sel]
        prov = None if self.provenance is None else self.provenance[sel]
        aux = {k: np.asarray(v)[sel] for k, v in self.aux.items()}
        return Dataset(self.points[sel], self.index[sel], labels, prov, aux)


@dataclass(eq=False)
class DetectionReport:
    """Per-point verdicts from one detector run.

    Verdicts are stored column-wise (``index``, ``classes``, ``stages``,
    ``scores``) in input order. ``evaluated`` is ``None`` unless the detector
    subsampled, in which case it masks the points that were actually scored.
    """

    detector: str
    index: np.ndarray
    classes: np.ndarray
    stages: np.ndarray
    scores: np.ndarray
    params: dict
    elapsed_ms: float = 0.0
    evaluated: Optional[np.ndarray] = None
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.index)
        for name in ("classes", "stages", "scores"):
            if len(getattr(self, name)) != n:
                raise LengthMismatch(f"{name} has {len(getattr(self, name))} entries, expected {n}")
        if len(np.unique(self.index)) != n:
            raise ValueError("duplicate verdict indices")

    @property
    def n(self) -> int:
        return len(self.index)

    @property
    def outlier_mask(self) -> np.ndarray:
        return self.classes != VerdictClass.NORMAL

    @property
    def n_outliers(self) -> int:
        return int(np.count_nonzero(self.outlier_mask))

    @property
    def outlier_fraction(self) -> float:
        return self.n_outliers / self.n if self.n else 0.0

    def verdicts(self) -> Iterator[Verdict]:
        for i, c, s, sc in zip(self.index, self.classes, self.stages, self.scores):
            yield Verdict(int(i), VerdictClass(int(c)), Stage(int(s)), float(sc))

    def class_counts(self) -> dict[VerdictClass, int]:
        counts = np.bincount(self.classes.astype(np.int64), minlength=len(VerdictClass))
        return {c: int(counts[c]) for c in VerdictClass}

    def sorted_by_index(self) -> "DetectionReport":
        order = np.argsort(self.index, kind="stable")
        ev = None if self.evaluated is None else self.evaluated[order]
        return DetectionReport(
            self.detector, self.index[order], self.classes[order],
            self.stages[order], self.scores[order], self.params,
            self.elapsed_ms, ev, self.details,
        )

    def to_dict(self, include_timing: bool = True) -> dict[str, Any]:
        """Structured summary (no per-point verdicts)."""
        counts = self.class_counts()
        out = {
            "detector": self.detector,
            "n": self.n,
            "n_outliers": self.n_outliers,
            "outlier_fraction": self.outlier_fraction,
            "outlier_percent": round(100.0 * self.outlier_fraction, 2),
            "counts": {c.name.lower(): counts[c] for c in VerdictClass},
            "params": self.params,
            "details": self.details,
        }
        if self.evaluated is not None:
            out["n_evaluated"] = int(np.count_nonzero(self.evaluated))
        if include_timing:
            out["elapsed_ms"] = self.elapsed_ms
        return out

    def fingerprint(self) -> str:
        """Canonical serialization of everything except timing."""
        body = self.to_dict(include_timing=False)
        body["verdicts"] = [
            [int(i), int(c), int(s), float(sc).hex()]
            for i, c, s, sc in zip(self.index, self.classes, self.stages, self.scores)
        ]
        return json.dumps(body, sort_keys=True, default=_json_default)


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def make_report(detector, data: Dataset, classes, stages, scores, params,
                evaluated=None, details=None) -> DetectionReport:
    return DetectionReport(
        detector=detector,
        index=np.array(data.index, dtype=np.int64),
        classes=np.asarray(classes, dtype=np.int8),
        stages=np.asarray(stages, dtype=np.int8),
        scores=np.asarray(scores, dtype=np.float64),
        params=params,
        evaluated=evaluated,
        details=details or {},
    )


def timed(fn):
    """Decorator stamping the wall-clock time of a detector call (ms) on its report."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        report = fn(*args, **kwargs)
        report.elapsed_ms = (time.perf_counter() - t0) * 1e3
        return report

    return wrapper


def make_rng(seed: int) -> np.random.Generator:
    if not 0 <= int(seed) < 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return np.random.default_rng(int(seed))


def summarize(report: DetectionReport) -> str:
    counts = report.class_counts()
    text = (
        f"{report.detector}: {report.n_outliers} outliers "
        f"({100.0 * report.outlier_fraction:.2f}%) of {report.n} points "
        f"[normal={counts[VerdictClass.NORMAL]}, "
        f"global={counts[VerdictClass.GLOBAL_OUTLIER]}, "
        f"local={counts[VerdictClass.LOCAL_OUTLIER]}]"
    )
    if report.evaluated is not None:
        text += f" scored={int(np.count_nonzero(report.evaluated))}"
    return text + f" in {report.elapsed_ms:.1f} ms"
