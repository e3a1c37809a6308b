import numpy as np
import pytest

from conftest import matrix_from_xy
from survpipe.crossval import cross_validate
from survpipe.errors import ValidationError
from survpipe.imbalance import ImbalancePlan
from survpipe.models import TrainConfig


def separable_matrix(rng, n=200):
    X = rng.normal(0, 1, (n, 3))
    y = (X[:, 0] + 0.5 * X[:, 1] + rng.normal(0, 0.4, n) > 0).astype(np.int8)
    return matrix_from_xy(X, y)


def test_grid_of_one_selects_it(rng):
    m = separable_matrix(rng)
    cfg = TrainConfig(kind="logistic", epochs=50)
    result = cross_validate(m, [cfg], k=5, seed=1)
    assert result.selected_config == cfg
    assert result.selected_index == 0
    assert len(result.entries) == 5
    folds = sorted(e.fold for e in result.entries)
    assert folds == [0, 1, 2, 3, 4]


def test_degenerate_config_loses_to_sane_one(rng):
    m = separable_matrix(rng, n=300)
    # min_leaf larger than any node: the tree cannot split, so every fold
    # sees one constant vote and AUC collapses to exactly 0.5 (all ties)
    degenerate = TrainConfig(kind="forest", n_trees=1, max_depth=1, min_leaf=10**6, seed=1)
    sane = TrainConfig(kind="forest", n_trees=20, max_depth=6, seed=1)
    result = cross_validate(m, [degenerate, sane], k=5, seed=2)
    assert result.selected_index == 1
    assert result.mean_metric[1] > result.mean_metric[0]
    assert result.mean_metric[0] == pytest.approx(0.5, abs=1e-12)


def test_deterministic_per_seed(rng):
    m = separable_matrix(rng)
    grid = [TrainConfig(kind="logistic", epochs=40, l2=v) for v in (0.0, 0.01)]
    a = cross_validate(m, grid, k=4, seed=7)
    b = cross_validate(m, grid, k=4, seed=7)
    assert a == b


def test_tie_breaks_to_first_grid_entry(rng):
    m = separable_matrix(rng)
    cfg = TrainConfig(kind="logistic", epochs=30)
    result = cross_validate(m, [cfg, cfg], k=3, seed=0)
    assert result.selected_index == 0


def test_empty_grid_rejected(rng):
    with pytest.raises(ValidationError, match="non-empty"):
        cross_validate(separable_matrix(rng), [], k=3, seed=0)


def test_gmean_selection_metric(rng):
    m = separable_matrix(rng)
    grid = [TrainConfig(kind="logistic", epochs=60)]
    result = cross_validate(m, grid, k=3, seed=3, metric="gmean")
    assert result.metric == "gmean"
    entry_means = np.mean([e.g_mean for e in result.entries])
    assert result.mean_metric[0] == pytest.approx(entry_means)


def test_imbalance_plan_applied_to_training_folds_only(rng):
    n = 400
    X = rng.normal(0, 1, (n, 2))
    y = np.array([1] * 320 + [0] * 80, dtype=np.int8)
    m = matrix_from_xy(X, y)
    plan = ImbalancePlan(method="undersample", seed=1)
    result = cross_validate(m, [TrainConfig(kind="logistic", epochs=20)],
                            plan=plan, k=4, seed=4)
    # every fold of every row is evaluated: per-fold sens/spec come from the
    # full held-out fold, whose size is untouched by the plan
    assert len(result.entries) == 4


def test_unknown_metric_rejected(rng):
    with pytest.raises(ValidationError, match="metric"):
        cross_validate(separable_matrix(rng), [TrainConfig()], metric="accuracy")


def test_single_class_matrix_rejected(rng):
    m = matrix_from_xy(rng.normal(0, 1, (20, 2)), np.ones(20, dtype=np.int8))
    with pytest.raises(ValidationError):
        cross_validate(m, [TrainConfig()], k=4, seed=0)
