"""Fully-connected network: ReLU hidden layers, sigmoid output, weighted
binary cross-entropy, mini-batch gradient descent, inverted dropout.

Dropout masks scale surviving activations by 1/(1-p) during training so
prediction runs the plain forward pass. Weight init is Glorot-uniform from
the model seed; biases start at zero.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ValidationError
from .config import MLP, TrainConfig
from .logistic import sigmoid

_EPS = 1e-12


@dataclass
class MlpModel:
    weights: list[np.ndarray]  # one (fan_in, fan_out) matrix per layer
    biases: list[np.ndarray]
    fingerprint: int
    loss_history: list[float] = field(default_factory=list)

    kind = MLP

    @property
    def n_columns(self) -> int:
        return self.weights[0].shape[0]

    def _forward(self, X: np.ndarray, dropout: float = 0.0, rng=None):
        """Returns (activations per layer, pre-dropout hidden outputs, masks)."""
        acts = [X]
        masks = []
        h = X
        last = len(self.weights) - 1
        for i, (W, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ W + b
            if i == last:
                h = sigmoid(z)
                masks.append(None)
            else:
                h = np.maximum(z, 0.0)
                if dropout > 0.0:
                    mask = (rng.random(h.shape) >= dropout) / (1.0 - dropout)
                    h = h * mask
                    masks.append(mask)
                else:
                    masks.append(None)
            acts.append(h)
        return acts, masks

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        acts, _ = self._forward(X)
        return acts[-1][:, 0]

    def loss_and_gradients(self, X: np.ndarray, y: np.ndarray, sample_weight: np.ndarray,
                           dropout: float = 0.0, rng=None):
        """Weighted BCE loss plus gradients for every weight matrix and bias.

        The loss is normalized by the batch's total sample weight, matching
        the logistic model's weighting semantics.
        """
        acts, masks = self._forward(X, dropout, rng)
        p = acts[-1][:, 0]
        total = sample_weight.sum()
        pc = np.clip(p, _EPS, 1.0 - _EPS)
        loss = -(sample_weight * (y * np.log(pc) + (1.0 - y) * np.log(1.0 - pc))).sum() / total

        grads_w = [None] * len(self.weights)
        grads_b = [None] * len(self.biases)
        # sigmoid + BCE collapse: dL/dz_out = w_i (p_i - y_i) / total
        delta = (sample_weight * (p - y) / total)[:, None]
        for i in range(len(self.weights) - 1, -1, -1):
            grads_w[i] = acts[i].T @ delta
            grads_b[i] = delta.sum(axis=0)
            if i > 0:
                delta = delta @ self.weights[i].T
                if masks[i - 1] is not None:
                    delta = delta * masks[i - 1]
                delta = delta * (acts[i] > 0.0)
        return loss, grads_w, grads_b


def init_mlp(n_columns: int, cfg: TrainConfig, fingerprint: int) -> MlpModel:
    rng = np.random.default_rng(cfg.seed)
    sizes = [n_columns, *cfg.hidden, 1]
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MlpModel(weights, biases, fingerprint)


def train_mlp(X, y, sample_weight, cfg: TrainConfig, fingerprint: int) -> MlpModel:
    if (sample_weight < 0).any() or sample_weight.sum() <= 0:
        raise ValidationError("sample weights must be nonnegative and not all zero")
    model = init_mlp(X.shape[1], cfg, fingerprint)
    rng = np.random.default_rng([cfg.seed, 1])
    n = X.shape[0]
    y = y.astype(np.float64)
    for _ in range(cfg.mlp_epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        epoch_weight = 0.0
        for start in range(0, n, cfg.batch_size):
            batch = order[start:start + cfg.batch_size]
            wb = sample_weight[batch]
            if wb.sum() <= 0.0:
                continue
            loss, grads_w, grads_b = model.loss_and_gradients(
                X[batch], y[batch], wb, dropout=cfg.dropout, rng=rng)
            for i in range(len(model.weights)):
                model.weights[i] -= cfg.mlp_learning_rate * grads_w[i]
                model.biases[i] -= cfg.mlp_learning_rate * grads_b[i]
            epoch_loss += loss * wb.sum()
            epoch_weight += wb.sum()
        model.loss_history.append(epoch_loss / epoch_weight)
    return model
