"""Discrete AdaBoost over exhaustive decision stumps.

Each round fits the stump minimizing weighted 0-1 error over every
(feature, threshold, polarity) candidate, where thresholds are midpoints
between distinct sorted values. Round weight is alpha = 0.5*ln((1-e)/e);
boosting stops early when a round's error hits 0 (alpha capped) or 0.5.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError
from .config import ADABOOST, TrainConfig
from .logistic import sigmoid
from .trees import _impurity

ALPHA_CAP = math.log(1e12)


@dataclass(frozen=True)
class Stump:
    feature: int
    threshold: float
    left_sign: int  # prediction in {-1, +1} for x[feature] < threshold; right side is the negation

    def predict(self, X: np.ndarray) -> np.ndarray:
        signs = np.where(X[:, self.feature] < self.threshold, self.left_sign, -self.left_sign)
        return signs.astype(np.float64)


def fit_stump(X: np.ndarray, signs: np.ndarray, weights: np.ndarray) -> tuple[Stump, float]:
    """Exhaustive weighted-error stump; ties prefer the lowest feature index,
    then left_sign=+1 at its lowest minimizing threshold. Returns (stump, error)."""
    n, d = X.shape
    total = weights.sum()
    w_pos_total = weights[signs > 0].sum()
    best = None  # (error, feature, threshold, left_sign)
    for f in range(d):
        x = X[:, f]
        order = np.argsort(x)
        xs = x[order]
        boundaries = np.flatnonzero(xs[:-1] != xs[1:])
        if len(boundaries) == 0:
            continue
        w_sorted = weights[order]
        cpos = np.cumsum(np.where(signs[order] > 0, w_sorted, 0.0))[boundaries]
        call = np.cumsum(w_sorted)[boundaries]
        cneg = call - cpos
        #  left_sign=+1: wrong on negatives left of the cut and positives right of it
        err_plus = cneg + (w_pos_total - cpos)
        err_minus = total - err_plus
        for err in (err_plus, err_minus):
            j = int(np.argmin(err))
            if best is None or err[j] < best[0] - 1e-15:
                sign = 1 if err is err_plus else -1
                thr = 0.5 * (xs[boundaries[j]] + xs[boundaries[j] + 1])
                best = (float(err[j]), f, thr, sign)
    if best is None:
        raise ValidationError("no usable split: every feature is constant")
    err, f, thr, sign = best
    return Stump(f, thr, sign), err / total


@dataclass
class AdaBoostModel:
    stumps: list[Stump]
    alphas: list[float]
    gains: list[float]  # per-stump weighted gini decrease, for importance
    n_columns: int
    fingerprint: int

    kind = ADABOOST

    def margins(self, X: np.ndarray) -> np.ndarray:
        """Normalized ensemble margin sum(alpha_t * h_t(x)) / sum(alpha_t), in [-1, 1]."""
        if not self.stumps:
            return np.zeros(X.shape[0])
        acc = np.zeros(X.shape[0])
        for stump, alpha in zip(self.stumps, self.alphas):
            acc += alpha * stump.predict(X)
        return acc / sum(self.alphas)

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return sigmoid(2.0 * self.margins(X))


def _stump_gain(X, signs, weights, stump: Stump) -> float:
    """Weighted gini decrease of the stump split under this round's weights."""
    y = (signs > 0).astype(np.float64)
    total = weights.sum()
    parent = _impurity(np.array([(weights * y).sum()]), np.array([total]), "gini")[0]
    left = X[:, stump.feature] < stump.threshold
    w_l, w_r = weights[left].sum(), weights[~left].sum()
    wy_l = (weights * y)[left].sum()
    wy_r = (weights * y).sum() - wy_l
    child = (w_l * _impurity(np.array([wy_l]), np.array([w_l]), "gini")[0]
             + w_r * _impurity(np.array([wy_r]), np.array([w_r]), "gini")[0]) / total
    return float(parent - child)


def train_adaboost(X, y, sample_weight, cfg: TrainConfig, fingerprint: int) -> AdaBoostModel:
    signs = np.where(y == 1, 1.0, -1.0)
    w = sample_weight / sample_weight.sum()
    stumps, alphas, gains = [], [], []
    for _ in range(cfg.n_rounds):
        stump, err = fit_stump(X, signs, w)
        if err >= 0.5:
            break
        alpha = ALPHA_CAP if err <= 0.0 else min(0.5 * math.log((1.0 - err) / err), ALPHA_CAP)
        stumps.append(stump)
        alphas.append(alpha)
        gains.append(_stump_gain(X, signs, w, stump))
        if err <= 0.0:
            break
        w = w * np.exp(-alpha * signs * stump.predict(X))
        w = w / w.sum()
    return AdaBoostModel(stumps, alphas, gains, X.shape[1], fingerprint)
