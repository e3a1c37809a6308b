"""Confusion-matrix metrics, G-mean, and rank-based AUC.

AUC uses the Mann-Whitney rank statistic with midranks for ties (half
credit per tied positive/negative pair), which equals the trapezoidal area
under the ROC curve. Rates with a zero denominator are defined as 0 so
degenerate folds produce a 0 G-mean instead of NaN.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    tn: int
    fp: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.tn, self.fp, self.fn) < 0:
            raise ValidationError("confusion counts must be nonnegative")

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    @property
    def sensitivity(self) -> float:
        denom = self.tp + self.fn
        return self.tp / denom if denom else 0.0

    @property
    def specificity(self) -> float:
        denom = self.tn + self.fp
        return self.tn / denom if denom else 0.0


def confusion(true_labels, predicted_labels) -> ConfusionMatrix:
    t = np.asarray(true_labels)
    p = np.asarray(predicted_labels)
    if len(t) != len(p):
        raise ValidationError(f"label vectors differ in length: {len(t)} vs {len(p)}")
    if len(t) == 0:
        raise ValidationError("cannot build a confusion matrix from zero rows")
    return ConfusionMatrix(
        tp=int(((t == 1) & (p == 1)).sum()),
        tn=int(((t == 0) & (p == 0)).sum()),
        fp=int(((t == 0) & (p == 1)).sum()),
        fn=int(((t == 1) & (p == 0)).sum()),
    )


def g_mean(cm: ConfusionMatrix) -> float:
    return math.sqrt(cm.sensitivity * cm.specificity)


def _midranks(scores: np.ndarray) -> np.ndarray:
    order = np.argsort(scores, kind="mergesort")
    ranks = np.empty(len(scores))
    sorted_scores = scores[order]
    i = 0
    while i < len(scores):
        j = i
        while j + 1 < len(scores) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0  # average of ranks i+1..j+1
        i = j + 1
    return ranks


def auc(scores, labels) -> float:
    """Probability a random positive outscores a random negative (ties half)."""
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    if len(s) != len(y):
        raise ValidationError("scores and labels differ in length")
    if not np.isfinite(s).all():
        raise ValidationError("scores must be finite")
    n_pos = int((y == 1).sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValidationError("AUC requires both classes present")
    ranks = _midranks(s)
    u = ranks[y == 1].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def roc_points(scores, labels) -> np.ndarray:
    """(FPR, TPR) pairs swept over every distinct score threshold, for file output."""
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    order = np.argsort(-s, kind="mergesort")
    y_sorted = y[order]
    s_sorted = s[order]
    tps = np.cumsum(y_sorted == 1)
    fps = np.cumsum(y_sorted == 0)
    last_of_run = np.flatnonzero(np.diff(s_sorted) != 0)
    cut = np.concatenate([last_of_run, [len(s_sorted) - 1]])
    n_pos = max(int((y == 1).sum()), 1)
    n_neg = max(int((y == 0).sum()), 1)
    points = np.column_stack([fps[cut] / n_neg, tps[cut] / n_pos])
    return np.vstack([[0.0, 0.0], points])


@dataclass(frozen=True)
class EvaluationReport:
    confusion: ConfusionMatrix
    auc: float
    threshold: float
    cohort: str = ""
    model_kind: str = ""
    imbalance: str = "none"

    @property
    def sensitivity(self) -> float:
        return self.confusion.sensitivity

    @property
    def specificity(self) -> float:
        return self.confusion.specificity

    @property
    def g_mean(self) -> float:
        return g_mean(self.confusion)


def evaluate_scores(scores, labels, threshold: float = 0.5, cohort: str = "",
                    model_kind: str = "", imbalance: str = "none") -> EvaluationReport:
    if not 0.0 <= threshold <= 1.0:
        raise ValidationError("threshold must lie in [0, 1]")
    predicted = (np.asarray(scores) >= threshold).astype(np.int8)
    return EvaluationReport(
        confusion=confusion(labels, predicted),
        auc=auc(scores, labels),
        threshold=threshold,
        cohort=cohort,
        model_kind=model_kind,
        imbalance=imbalance,
    )
