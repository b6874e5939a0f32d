"""Confusion counts, the six point indicators, and the comparison table.

Positive class = outlier. A predicted positive is any non-Normal verdict.
Ratios with a zero denominator are reported as ``None`` with a reason in
``MetricsSummary.undefined`` rather than silently as zero.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import DetectionReport, LengthMismatch

INDICATORS = ("tpr", "fpr", "precision", "accuracy", "recall", "f_measure")
ZERO_DENOMINATOR = "undefined (zero denominator)"


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ValueError("confusion counts must be nonnegative")

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @classmethod
    def from_predictions(cls, predicted, truth) -> "ConfusionCounts":
        p = np.asarray(predicted, dtype=bool)
        t = np.asarray(truth, dtype=bool)
        if p.shape != t.shape:
            raise LengthMismatch(f"{p.size} predictions for {t.size} labels")
        return cls(
            tp=int(np.count_nonzero(p & t)),
            fp=int(np.count_nonzero(p & ~t)),
            tn=int(np.count_nonzero(~p & ~t)),
            fn=int(np.count_nonzero(~p & t)),
        )

    def swapped(self) -> "ConfusionCounts":
        """Same predictions scored with normal as the positive class."""
        return ConfusionCounts(tp=self.tn, fp=self.fn, tn=self.tp, fn=self.fp)


@dataclass(frozen=True)
class MetricsSummary:
    counts: ConfusionCounts
    tpr: Optional[float]
    fpr: Optional[float]
    precision: Optional[float]
    accuracy: Optional[float]
    recall: Optional[float]
    f_measure: Optional[float]
    elapsed_ms: float = 0.0
    undefined: dict = field(default_factory=dict)

    @property
    def fnr(self) -> Optional[float]:
        return _ratio(self.counts.fn, self.counts.tp + self.counts.fn)

    @property
    def tnr(self) -> Optional[float]:
        return _ratio(self.counts.tn, self.counts.fp + self.counts.tn)

    def to_dict(self) -> dict:
        out = {name: getattr(self, name) for name in INDICATORS}
        out["counts"] = asdict(self.counts)
        out["elapsed_ms"] = self.elapsed_ms
        out["undefined"] = dict(self.undefined)
        return out


def _ratio(num: int, den: int) -> Optional[float]:
    return num / den if den else None


def summarize_counts(c: ConfusionCounts, elapsed_ms: float = 0.0) -> MetricsSummary:
    values = {
        "tpr": _ratio(c.tp, c.tp + c.fn),
        "fpr": _ratio(c.fp, c.fp + c.tn),
        "precision": _ratio(c.tp, c.tp + c.fp),
        "accuracy": _ratio(c.tp + c.tn, c.n),
    }
    values["recall"] = values["tpr"]
    p, r = values["precision"], values["recall"]
    values["f_measure"] = 2 * p * r / (p + r) if p is not None and r is not None and p + r > 0 else None
    undefined = {k: ZERO_DENOMINATOR for k, v in values.items() if v is None}
    return MetricsSummary(counts=c, elapsed_ms=elapsed_ms, undefined=undefined, **values)


def evaluate(report: DetectionReport, truth) -> MetricsSummary:
    """Score a report against per-index truth labels (``True`` = outlier).

    ``truth`` is aligned with the dataset the report came from. For a
    subsampled report only the scored points are evaluated.
    """
    t = np.asarray(truth, dtype=bool).reshape(-1)
    if t.size != report.n:
        raise LengthMismatch(f"{t.size} labels for {report.n} verdicts")
    predicted = report.outlier_mask
    if report.evaluated is not None:
        predicted, t = predicted[report.evaluated], t[report.evaluated]
    return summarize_counts(ConfusionCounts.from_predictions(predicted, t), report.elapsed_ms)


def _sort_value(v: Optional[float]) -> float:
    return -1.0 if v is None else v


def compare(entries: Sequence[tuple[str, MetricsSummary]]) -> list[tuple[str, MetricsSummary]]:
    """Rank by F-measure, then precision, both descending; undefined sorts last."""
    return sorted(
        entries,
        key=lambda e: (-_sort_value(e[1].f_measure), -_sort_value(e[1].precision)),
    )


_COLUMNS = ("Detector", "TPR (%)", "FPR (%)", "Precision (%)", "Accuracy (%)",
            "Recall (%)", "F-measure (%)", "Execution Time (ms)")


def _pct(v: Optional[float]) -> str:
    return "undef" if v is None else f"{100.0 * v:.1f}"


def render_table(entries: Sequence[tuple[str, MetricsSummary]]) -> str:
    rows = [list(_COLUMNS)]
    for name, m in compare(entries):
        rows.append([name] + [_pct(getattr(m, k)) for k in INDICATORS] + [f"{m.elapsed_ms:,.0f}"])
    widths = [max(len(r[i]) for r in rows) for i in range(len(_COLUMNS))]
    lines = []
    for j, r in enumerate(rows):
        cells = [r[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(r[1:], widths[1:])]
        lines.append("  ".join(cells))
        if j == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)
