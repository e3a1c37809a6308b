"""Uniform train / predict / classify contract over the four classifiers."""
from __future__ import annotations

from typing import Union

import numpy as np

from ..encoding import EncodedMatrix
from ..errors import ValidationError
from .adaboost import AdaBoostModel, train_adaboost
from .config import ADABOOST, FOREST, LOGISTIC, MLP, TrainConfig
from .logistic import LogisticModel, train_logistic
from .mlp import MlpModel, train_mlp
from .trees import ForestModel, train_forest

TrainedModel = Union[LogisticModel, ForestModel, AdaBoostModel, MlpModel]

_TRAINERS = {
    LOGISTIC: train_logistic,
    FOREST: train_forest,
    ADABOOST: train_adaboost,
    MLP: train_mlp,
}


def train(matrix: EncodedMatrix, cfg: TrainConfig,
          sample_weight: np.ndarray | None = None) -> TrainedModel:
    """Train one classifier on a labeled design matrix.

    sample_weight defaults to uniform; all four kinds honor per-instance
    weights (loss weighting for the gradient models, weighted resampling
    for the forest, initial boosting distribution for adaboost).
    """
    if matrix.labels is None:
        raise ValidationError("training requires a labeled matrix")
    y = np.asarray(matrix.labels, dtype=np.float64)
    classes = np.unique(y)
    if len(classes) < 2:
        raise ValidationError("training requires both classes present")
    if sample_weight is None:
        sample_weight = np.ones(matrix.n_rows)
    sample_weight = np.asarray(sample_weight, dtype=np.float64)
    if len(sample_weight) != matrix.n_rows:
        raise ValidationError("sample_weight length must equal the row count")
    if (sample_weight < 0).any() or sample_weight.sum() <= 0:
        raise ValidationError("sample weights must be nonnegative and not all zero")
    trainer = _TRAINERS[cfg.kind]
    return trainer(matrix.X, y, sample_weight, cfg, matrix.feature_map.fingerprint())


def _check_compat(model: TrainedModel, matrix: EncodedMatrix):
    if matrix.n_columns != model.n_columns:
        raise ValidationError(
            f"matrix has {matrix.n_columns} columns, model expects {model.n_columns}"
        )
    if model.fingerprint != matrix.feature_map.fingerprint():
        raise ValidationError("matrix feature map does not match the one the model was trained on")


def predict_proba(model: TrainedModel, matrix: EncodedMatrix) -> np.ndarray:
    """Per-row probability of the positive class, in [0, 1]."""
    _check_compat(model, matrix)
    return model.predict_proba(matrix.X)


def classify(model: TrainedModel, matrix: EncodedMatrix, threshold: float = 0.5) -> np.ndarray:
    """Positive iff predicted probability >= threshold."""
    if not 0.0 <= threshold <= 1.0:
        raise ValidationError("threshold must lie in [0, 1]")
    return (predict_proba(model, matrix) >= threshold).astype(np.int8)
