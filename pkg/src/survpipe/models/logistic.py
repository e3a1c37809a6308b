"""Weighted logistic regression trained by batch gradient descent."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ValidationError
from .config import LOGISTIC, TrainConfig

_EPS = 1e-12


def sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def loss_and_gradient(X: np.ndarray, y: np.ndarray, w: np.ndarray, b: float,
                      sample_weight: np.ndarray, l2: float):
    """Weighted binary cross-entropy with an L2 penalty on the weights (not the bias).

    The data term is normalized by the total sample weight, which makes an
    integer weight k on a row exactly equivalent to replicating that row k
    times, and makes the optimum invariant to rescaling all weights.
    """
    p = sigmoid(X @ w + b)
    total = sample_weight.sum()
    pc = np.clip(p, _EPS, 1.0 - _EPS)
    data = -(sample_weight * (y * np.log(pc) + (1.0 - y) * np.log(1.0 - pc))).sum() / total
    loss = data + 0.5 * l2 * float(w @ w)
    residual = sample_weight * (p - y)
    grad_w = X.T @ residual / total + l2 * w
    grad_b = residual.sum() / total
    return loss, grad_w, grad_b


@dataclass
class LogisticModel:
    weights: np.ndarray
    bias: float
    fingerprint: int
    loss_history: list[float] = field(default_factory=list)

    kind = LOGISTIC

    @property
    def n_columns(self) -> int:
        return len(self.weights)

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return sigmoid(X @ self.weights + self.bias)


def train_logistic(X: np.ndarray, y: np.ndarray, sample_weight: np.ndarray,
                   cfg: TrainConfig, fingerprint: int) -> LogisticModel:
    if (sample_weight < 0).any() or sample_weight.sum() <= 0:
        raise ValidationError("sample weights must be nonnegative and not all zero")
    w = np.zeros(X.shape[1])
    b = 0.0
    history = []
    for _ in range(cfg.epochs):
        loss, grad_w, grad_b = loss_and_gradient(X, y, w, b, sample_weight, cfg.l2)
        history.append(loss)
        w = w - cfg.learning_rate * grad_w
        b = b - cfg.learning_rate * grad_b
    return LogisticModel(w, b, fingerprint, history)
