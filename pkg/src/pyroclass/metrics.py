"""Confusion-matrix metrics, ROC curves, and AUC.

The confusion matrix displays as [[TP, FP], [FN, TN]]. Rate metrics with a
zero denominator return None (an explicitly undefined value that reports
render as "n/a") rather than a fabricated 0.0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DataError


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    fn: int
    tn: int

    def __post_init__(self):
        for name in ("tp", "fp", "fn", "tn"):
            if getattr(self, name) < 0:
                raise DataError(f"{name} must be non-negative, "
                                f"got {getattr(self, name)}")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def as_nested(self) -> list:
        return [[self.tp, self.fp], [self.fn, self.tn]]

    def __str__(self) -> str:
        return f"[[{self.tp}, {self.fp}], [{self.fn}, {self.tn}]]"


@dataclass(frozen=True)
class RocCurve:
    """(fpr, tpr) points, both coordinates non-decreasing, in [0, 1],
    starting at (0, 0) and ending at (1, 1)."""

    points: tuple

    def __post_init__(self):
        pts = self.points
        if len(pts) < 2 or pts[0] != (0.0, 0.0) or pts[-1] != (1.0, 1.0):
            raise DataError("an ROC curve must run from (0,0) to (1,1)")
        for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
            if x1 < x0 or y1 < y0:
                raise DataError(f"ROC points must be non-decreasing; "
                                f"({x0},{y0}) -> ({x1},{y1})")


def confusion(labels, predictions) -> ConfusionMatrix:
    """Count prediction outcomes; the positive class is +1."""
    y = np.asarray(labels)
    p = np.asarray(predictions)
    if y.shape != p.shape or y.ndim != 1:
        raise DataError(f"labels {y.shape} and predictions {p.shape} must "
                        f"be equal-length vectors")
    if len(y) < 1:
        raise DataError("confusion requires at least one sample")
    for name, arr in (("labels", y), ("predictions", p)):
        if not np.all((arr == 1) | (arr == -1)):
            bad = arr[(arr != 1) & (arr != -1)][0]
            raise DataError(f"{name} must be +1 or -1, found {bad}")
    return ConfusionMatrix(
        tp=int(np.sum((y == 1) & (p == 1))),
        fp=int(np.sum((y == -1) & (p == 1))),
        fn=int(np.sum((y == 1) & (p == -1))),
        tn=int(np.sum((y == -1) & (p == -1))),
    )


def accuracy(cm: ConfusionMatrix) -> float:
    """(TP + TN) / total."""
    if cm.total < 1:
        raise DataError("accuracy of an empty confusion matrix is undefined")
    return (cm.tp + cm.tn) / cm.total


def tpr(cm: ConfusionMatrix) -> Optional[float]:
    """TP / (TP + FN); None when there are no actual positives."""
    denom = cm.tp + cm.fn
    return cm.tp / denom if denom else None


def fpr(cm: ConfusionMatrix) -> Optional[float]:
    """FP / (FP + TN); None when there are no actual negatives."""
    denom = cm.fp + cm.tn
    return cm.fp / denom if denom else None


def f1(cm: ConfusionMatrix) -> Optional[float]:
    """2TP / (2TP + FP + FN); None when that denominator is zero."""
    denom = 2 * cm.tp + cm.fp + cm.fn
    return 2 * cm.tp / denom if denom else None


def roc_from_scores(labels, scores) -> RocCurve:
    """Threshold-sweep ROC from decision scores.

    Samples are ranked by score descending (ties form one step); after each
    distinct score the cumulative (fpr, tpr) is emitted, with (0,0)
    prepended and (1,1) appended.
    """
    y = np.asarray(labels)
    s = np.asarray(scores, dtype=np.float64)
    if y.shape != s.shape or y.ndim != 1:
        raise DataError(f"labels {y.shape} and scores {s.shape} must be "
                        f"equal-length vectors")
    n_pos = int(np.sum(y == 1))
    n_neg = int(np.sum(y == -1))
    if n_pos + n_neg != len(y):
        bad = y[(y != 1) & (y != -1)][0]
        raise DataError(f"labels must be +1 or -1, found {bad}")
    if n_pos == 0 or n_neg == 0:
        raise DataError("ROC requires at least one positive and one "
                        "negative label")
    order = np.argsort(-s, kind="stable")
    points = [(0.0, 0.0)]
    tp = fp = 0
    i = 0
    while i < len(order):
        j = i
        while j < len(order) and s[order[j]] == s[order[i]]:
            if y[order[j]] == 1:
                tp += 1
            else:
                fp += 1
            j += 1
        points.append((fp / n_neg, tp / n_pos))
        i = j
    if points[-1] != (1.0, 1.0):
        points.append((1.0, 1.0))
    return RocCurve(points=tuple(points))


def roc_from_points(points) -> RocCurve:
    """Build a curve from raw (fpr, tpr) operating points.

    Points are sorted by fpr (ties by tpr) between the (0,0) and (1,1)
    anchors; tpr is then monotonized by running maximum, since operating
    points gathered from different models need not be monotone.
    """
    cleaned = []
    for fpr_value, tpr_value in points:
        x, y = float(fpr_value), float(tpr_value)
        if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
            raise DataError(f"ROC point ({x}, {y}) is outside [0, 1]")
        cleaned.append((x, y))
    cleaned.sort()
    out = [(0.0, 0.0)]
    running = 0.0
    for x, y in cleaned:
        running = max(running, y)
        if (x, running) != out[-1]:
            out.append((x, running))
    if out[-1] != (1.0, 1.0):
        out.append((1.0, 1.0))
    return RocCurve(points=tuple(out))


def auc(curve: RocCurve) -> float:
    """Trapezoidal area under the curve, integrated over fpr."""
    total = 0.0
    pts = curve.points
    for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
        total += 0.5 * (x1 - x0) * (y0 + y1)
    return total
