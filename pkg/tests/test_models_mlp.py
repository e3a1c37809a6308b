import math

import numpy as np
import pytest

from conftest import matrix_from_xy
from survpipe.models import TrainConfig, predict_proba, train
from survpipe.models.mlp import init_mlp, train_mlp


def relu(v):
    return v if v > 0 else 0.0


def sig(v):
    return 1.0 / (1.0 + math.exp(-v))


def test_one_step_matches_hand_computed_backprop():
    """2 rows x 2 features, one hidden layer of 2, dropout off, full batch.

    The expected update is computed below with plain scalar arithmetic,
    independent of the library's matrix backprop.
    """
    cfg = TrainConfig(kind="mlp", hidden=(2,), dropout=0.0, mlp_learning_rate=0.1,
                      mlp_epochs=1, batch_size=2, seed=42)
    X = np.array([[0.5, -1.0], [1.5, 2.0]])
    y = np.array([0.0, 1.0])
    init = init_mlp(2, cfg, fingerprint=0)
    W1 = init.weights[0].copy()
    b1 = init.biases[0].copy()
    W2 = init.weights[1].copy()
    b2 = init.biases[1].copy()

    # scalar forward/backward per row, averaged (uniform weights, total=2)
    gW1 = np.zeros((2, 2))
    gb1 = np.zeros(2)
    gW2 = np.zeros((2, 1))
    gb2 = np.zeros(1)
    for i in range(2):
        z1 = [X[i, 0] * W1[0, 0] + X[i, 1] * W1[1, 0] + b1[0],
              X[i, 0] * W1[0, 1] + X[i, 1] * W1[1, 1] + b1[1]]
        h = [relu(z1[0]), relu(z1[1])]
        z2 = h[0] * W2[0, 0] + h[1] * W2[1, 0] + b2[0]
        p = sig(z2)
        dz2 = (p - y[i]) / 2.0  # dL/dz2 with 1/total weighting
        gW2[0, 0] += h[0] * dz2
        gW2[1, 0] += h[1] * dz2
        gb2[0] += dz2
        for j in range(2):
            dh = W2[j, 0] * dz2
            dz1 = dh if z1[j] > 0 else 0.0
            gW1[0, j] += X[i, 0] * dz1
            gW1[1, j] += X[i, 1] * dz1
            gb1[j] += dz1

    expected_W1 = W1 - 0.1 * gW1
    expected_b1 = b1 - 0.1 * gb1
    expected_W2 = W2 - 0.1 * gW2
    expected_b2 = b2 - 0.1 * gb2

    model = train_mlp(X, y, np.ones(2), cfg, fingerprint=0)
    assert np.max(np.abs(model.weights[0] - expected_W1)) < 1e-9
    assert np.max(np.abs(model.biases[0] - expected_b1)) < 1e-9
    assert np.max(np.abs(model.weights[1] - expected_W2)) < 1e-9
    assert np.max(np.abs(model.biases[1] - expected_b2)) < 1e-9


def numeric_gradients(model, X, y, sw, step=1e-5):
    grads_w, grads_b = [], []
    for li in range(len(model.weights)):
        gw = np.zeros_like(model.weights[li])
        it = np.nditer(gw, flags=["multi_index"])
        while not it.finished:
            idx = it.multi_index
            orig = model.weights[li][idx]
            model.weights[li][idx] = orig + step
            up = model.loss_and_gradients(X, y, sw)[0]
            model.weights[li][idx] = orig - step
            down = model.loss_and_gradients(X, y, sw)[0]
            model.weights[li][idx] = orig
            gw[idx] = (up - down) / (2 * step)
            it.iternext()
        grads_w.append(gw)
        gb = np.zeros_like(model.biases[li])
        for j in range(len(gb)):
            orig = model.biases[li][j]
            model.biases[li][j] = orig + step
            up = model.loss_and_gradients(X, y, sw)[0]
            model.biases[li][j] = orig - step
            down = model.loss_and_gradients(X, y, sw)[0]
            model.biases[li][j] = orig
            gb[j] = (up - down) / (2 * step)
        grads_b.append(gb)
    return grads_w, grads_b


def min_abs_preactivation(model, X):
    """Smallest |z| over hidden layers; finite differences are only valid
    when no ReLU input sits within the probe step of its kink."""
    h = X
    lows = []
    for W, b in zip(model.weights[:-1], model.biases[:-1]):
        z = h @ W + b
        lows.append(np.min(np.abs(z)))
        h = np.maximum(z, 0.0)
    return min(lows)


def test_gradients_match_finite_differences(rng):
    done = 0
    while done < 6:
        n = int(rng.integers(3, 12))
        d = int(rng.integers(2, 6))
        cfg = TrainConfig(kind="mlp", hidden=(4, 3), dropout=0.0, seed=done)
        model = init_mlp(d, cfg, fingerprint=0)
        X = rng.normal(0, 1, (n, d))
        y = rng.integers(0, 2, n).astype(float)
        sw = rng.uniform(0.5, 2.0, n)
        if min_abs_preactivation(model, X) < 1e-3:
            continue
        done += 1
        _, gw, gb = model.loss_and_gradients(X, y, sw)
        nw, nb = numeric_gradients(model, X, y, sw)
        for a, b in zip(gw, nw):
            scale = max(np.max(np.abs(b)), 1e-8)
            assert np.max(np.abs(a - b)) / scale < 1e-4
        for a, b in zip(gb, nb):
            scale = max(np.max(np.abs(b)), 1e-8)
            assert np.max(np.abs(a - b)) / scale < 1e-4


def test_learns_separable_problem(rng):
    n = 400
    X = rng.normal(0, 1, (n, 3))
    y = (X[:, 0] + X[:, 1] > 0).astype(np.int8)
    m = matrix_from_xy(X, y)
    cfg = TrainConfig(kind="mlp", hidden=(16,), dropout=0.0, mlp_epochs=60,
                      mlp_learning_rate=0.05, batch_size=64, seed=0)
    model = train(m, cfg)
    acc = ((predict_proba(model, m) >= 0.5) == y).mean()
    assert acc > 0.95


def test_dropout_training_still_learns(rng):
    n = 500
    X = rng.normal(0, 1, (n, 3))
    y = (X[:, 0] > 0).astype(np.int8)
    m = matrix_from_xy(X, y)
    cfg = TrainConfig(kind="mlp", hidden=(32,), dropout=0.1, mlp_epochs=40,
                      mlp_learning_rate=0.05, batch_size=64, seed=1)
    model = train(m, cfg)
    acc = ((predict_proba(model, m) >= 0.5) == y).mean()
    assert acc > 0.9


def test_prediction_has_no_dropout_randomness(rng):
    X = rng.normal(0, 1, (50, 4))
    y = rng.integers(0, 2, 50).astype(np.int8)
    y[0], y[1] = 0, 1
    m = matrix_from_xy(X, y)
    cfg = TrainConfig(kind="mlp", hidden=(8,), dropout=0.3, mlp_epochs=3, seed=5)
    model = train(m, cfg)
    assert np.array_equal(predict_proba(model, m), predict_proba(model, m))


def test_deterministic_per_seed(rng):
    X = rng.normal(0, 1, (60, 4))
    y = (X[:, 0] > 0).astype(np.int8)
    m = matrix_from_xy(X, y)
    cfg = TrainConfig(kind="mlp", hidden=(8, 8), dropout=0.2, mlp_epochs=4, seed=7)
    a = train(m, cfg)
    b = train(m, cfg)
    for wa, wb in zip(a.weights, b.weights):
        assert np.array_equal(wa, wb)


def test_glorot_init_bounds():
    cfg = TrainConfig(kind="mlp", hidden=(10,), seed=3)
    model = init_mlp(6, cfg, fingerprint=0)
    bound0 = np.sqrt(6.0 / (6 + 10))
    assert np.max(np.abs(model.weights[0])) <= bound0
    assert np.all(model.biases[0] == 0.0)


def test_default_architecture_shapes():
    cfg = TrainConfig(kind="mlp")
    model = init_mlp(31, cfg, fingerprint=0)
    shapes = [w.shape for w in model.weights]
    assert shapes == [(31, 400), (400, 400), (400, 400), (400, 1)]
    assert cfg.dropout == 0.1
