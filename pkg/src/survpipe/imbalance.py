"""Class-imbalance remedies: random undersampling and cost-sensitive weights.

Both are pure functions of (labels, plan); they are only ever applied to
training rows — resampling or reweighting evaluation data would corrupt
every metric downstream.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .encoding import EncodedMatrix
from .errors import ValidationError

NONE = "none"
UNDERSAMPLE = "undersample"
COST_SENSITIVE = "weights"
METHODS = (NONE, UNDERSAMPLE, COST_SENSITIVE)


@dataclass(frozen=True)
class ImbalancePlan:
    method: str = NONE
    ratio: float = 1.0   # minority:majority target for undersampling
    factor: float = 5.0  # minority weight multiplier for cost-sensitive training
    seed: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValidationError(f"unknown imbalance method {self.method!r}")
        if self.ratio <= 0:
            raise ValidationError("undersample ratio must be > 0")
        if self.factor < 1:
            raise ValidationError("minority weight factor must be >= 1")


def _minority_label(labels: np.ndarray) -> int:
    n_pos = int((labels == 1).sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValidationError("both classes must be present")
    return 0 if n_neg <= n_pos else 1  # tie counts as minority 0 (not survived)


def undersample_indices(labels: np.ndarray, plan: ImbalancePlan) -> np.ndarray:
    """Row indices after undersampling: every minority row, plus a seeded
    uniform subset of round(|minority| / ratio) majority rows (capped),
    in original relative order."""
    labels = np.asarray(labels)
    minority = _minority_label(labels)
    keep_idx = np.flatnonzero(labels == minority)
    maj_idx = np.flatnonzero(labels != minority)
    target = min(int(round(len(keep_idx) / plan.ratio)), len(maj_idx))
    rng = np.random.default_rng(plan.seed)
    chosen = rng.choice(len(maj_idx), size=target, replace=False)
    return np.sort(np.concatenate([keep_idx, maj_idx[chosen]]))


def undersample(matrix: EncodedMatrix, plan: ImbalancePlan) -> EncodedMatrix:
    if matrix.labels is None:
        raise ValidationError("undersampling requires a labeled matrix")
    return matrix.select_rows(undersample_indices(matrix.labels, plan))


def class_weights(labels: np.ndarray, factor: float = 5.0) -> np.ndarray:
    """Per-row weights: 1.0 for the majority class, `factor` for the minority."""
    labels = np.asarray(labels)
    minority = _minority_label(labels)
    return np.where(labels == minority, float(factor), 1.0)


def apply_plan(matrix: EncodedMatrix, plan: ImbalancePlan | None) -> tuple[EncodedMatrix, np.ndarray | None]:
    """Resolve a plan into (training matrix, sample weights) for `train`."""
    if plan is None or plan.method == NONE:
        return matrix, None
    if plan.method == UNDERSAMPLE:
        return undersample(matrix, plan), None
    return matrix, class_weights(matrix.labels, plan.factor)
