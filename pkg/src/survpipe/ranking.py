"""Feature-importance extraction and top-k ranking tables.

Per-column scores (coefficient magnitudes or impurity decreases) are summed
over each original feature's one-hot column range, then normalized so every
model's feature scores sum to 1. Neural networks expose no per-column
attribution here, so requesting their ranking is an error by contract.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .encoding import FeatureMap
from .errors import ValidationError
from .models import ADABOOST, FOREST, LOGISTIC, MLP, TrainedModel


@dataclass(frozen=True)
class FeatureImportance:
    model_kind: str
    names: tuple[str, ...]
    scores: tuple[float, ...]  # normalized: sums to 1
    cohort: str = ""

    def as_dict(self) -> dict:
        return dict(zip(self.names, self.scores))

    def ranked(self) -> list[tuple[str, float]]:
        # descending score, ties broken by name
        return sorted(zip(self.names, self.scores), key=lambda kv: (-kv[1], kv[0]))


def _column_scores(model: TrainedModel) -> np.ndarray:
    if model.kind == LOGISTIC:
        return np.abs(model.weights)
    if model.kind == FOREST:
        return model.feature_gains()
    if model.kind == ADABOOST:
        scores = np.zeros(model.n_columns)
        for stump, alpha, gain in zip(model.stumps, model.alphas, model.gains):
            scores[stump.feature] += alpha * gain
        return scores
    raise ValidationError(
        f"model kind {model.kind!r} does not support feature ranking"
    )


def importance(model: TrainedModel, fmap: FeatureMap, cohort: str = "") -> FeatureImportance:
    """Aggregate per-column scores over each feature's column range."""
    if model.kind == MLP:
        raise ValidationError("mlp models do not support feature ranking")
    if model.fingerprint != fmap.fingerprint():
        raise ValidationError("feature map does not match the model's training map")
    per_column = _column_scores(model)
    totals = [float(per_column[f.start:f.stop].sum()) for f in fmap.features]
    grand = sum(totals)
    if grand <= 0:
        raise ValidationError("model carries no importance signal (no splits or all-zero weights)")
    return FeatureImportance(
        model_kind=model.kind,
        names=tuple(f.name for f in fmap.features),
        scores=tuple(t / grand for t in totals),
        cohort=cohort,
    )


def rank_table(importances, top_k: int = 7) -> tuple[list[str], list[list[str]]]:
    """Side-by-side top-k feature names, one column per (model, cohort).

    Returns (column headers, rows); short columns (top_k > feature count)
    are truncated, never padded with inventions.
    """
    importances = list(importances)
    if not importances:
        raise ValidationError("rank_table requires at least one importance")
    if top_k < 1:
        raise ValidationError("top_k must be >= 1")
    headers = []
    columns = []
    for imp in importances:
        label = imp.model_kind if not imp.cohort else f"{imp.model_kind}/{imp.cohort}"
        headers.append(label)
        columns.append([name for name, _ in imp.ranked()[:top_k]])
    depth = max(len(c) for c in columns)
    rows = [[c[i] if i < len(c) else "" for c in columns] for i in range(depth)]
    return headers, rows
