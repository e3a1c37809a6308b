"""K-fold cross-validated hyperparameter selection.

The imbalance plan is applied to the training folds only; held-out folds
are always evaluated untouched. The winning grid point maximizes the mean
selection metric, with ties going to the earliest grid entry.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .dataset import kfold_indices
from .encoding import EncodedMatrix
from .errors import ValidationError
from .imbalance import ImbalancePlan, apply_plan
from .metrics import auc as auc_score
from .metrics import confusion, g_mean
from .models import TrainConfig, predict_proba, train

SELECTION_METRICS = ("auc", "gmean")


@dataclass(frozen=True)
class FoldScore:
    config_index: int
    fold: int
    auc: float
    g_mean: float
    sensitivity: float
    specificity: float


@dataclass(frozen=True)
class CVResult:
    entries: tuple[FoldScore, ...]
    mean_metric: tuple[float, ...]  # per grid point, over evaluated folds
    selected_index: int
    selected_config: TrainConfig
    metric: str

    def table_rows(self) -> list[list]:
        return [[e.config_index, e.fold, e.auc, e.g_mean, e.sensitivity, e.specificity]
                for e in self.entries]


def cross_validate(matrix: EncodedMatrix, grid, plan: ImbalancePlan | None = None,
                   k: int = 5, seed: int = 0, metric: str = "auc",
                   stratified: bool = True, threshold: float = 0.5) -> CVResult:
    """Score every grid point over k folds and pick the best mean metric.

    Folds with a single-class held-out side are skipped with a warning; it
    is an error for every fold of a grid point to be skipped.
    """
    grid = list(grid)
    if not grid:
        raise ValidationError("hyperparameter grid must be non-empty")
    if metric not in SELECTION_METRICS:
        raise ValidationError(f"unknown selection metric {metric!r}")
    if matrix.labels is None:
        raise ValidationError("cross-validation requires a labeled matrix")
    folds = kfold_indices(matrix.labels, k, seed, stratified)
    all_rows = np.arange(matrix.n_rows)

    entries = []
    means = []
    for ci, cfg in enumerate(grid):
        fold_metrics = []
        for fi, held_out in enumerate(folds):
            train_rows = np.setdiff1d(all_rows, held_out, assume_unique=True)
            test_labels = matrix.labels[held_out]
            if len(np.unique(test_labels)) < 2 or len(np.unique(matrix.labels[train_rows])) < 2:
                warnings.warn(f"fold {fi} has a single class; skipping")
                continue
            train_matrix, sample_weight = apply_plan(matrix.select_rows(train_rows), plan)
            model = train(train_matrix, cfg, sample_weight)
            scores = predict_proba(model, matrix.select_rows(held_out))
            cm = confusion(test_labels, (scores >= threshold).astype(np.int8))
            fold_auc = auc_score(scores, test_labels)
            fold_g = g_mean(cm)
            entries.append(FoldScore(ci, fi, fold_auc, fold_g, cm.sensitivity, cm.specificity))
            fold_metrics.append(fold_auc if metric == "auc" else fold_g)
        if not fold_metrics:
            raise ValidationError(f"every fold was skipped for grid point {ci}")
        means.append(float(np.mean(fold_metrics)))

    best = int(np.argmax(means))  # argmax takes the first maximum: earliest grid entry wins ties
    return CVResult(tuple(entries), tuple(means), best, grid[best], metric)
