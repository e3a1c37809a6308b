"""Chained-equation imputation for continuous target features.

The cycle structure: fill every missing cell once (mean or median for
continuous, mode for categorical), then repeatedly regress each target
column on all other features and overwrite the originally-missing entries
with the regression predictions. Observed values are never altered. Later
cycles see the previous cycle's imputations in the predictor columns, which
is what lets interdependent targets converge.

Fitting also freezes the final-cycle regressors so held-out rows can be
imputed with training statistics only (no test leakage).
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field, replace

import numpy as np

from .dataset import Column, Dataset
from .errors import ValidationError
from .schema import CATEGORICAL, CONTINUOUS


@dataclass(frozen=True)
class ImputePlan:
    targets: tuple[str, ...] = ("tumor_size", "positive_nodes")
    cycles: int = 10
    initial_fill: str = "mean"  # or "median"
    ridge: float = 1e-6

    def __post_init__(self):
        if self.cycles < 1:
            raise ValidationError("cycle count must be >= 1")
        if self.initial_fill not in ("mean", "median"):
            raise ValidationError("initial_fill must be 'mean' or 'median'")


@dataclass(frozen=True)
class TargetRegression:
    target: str
    predictors: tuple[tuple[str, str, tuple[str, ...] | None], ...]  # (name, kind, categories)
    coef: np.ndarray  # intercept first, then one weight per design column


@dataclass(frozen=True)
class FittedImputer:
    plan: ImputePlan
    fill_values: dict = field(default_factory=dict)  # name -> float or mode string
    regressions: tuple[TargetRegression, ...] = ()


def solve_least_squares(design: np.ndarray, y: np.ndarray, ridge: float = 1e-6) -> np.ndarray:
    """Normal-equation linear solve, ridge-regularized when the system is singular."""
    A = design.T @ design
    b = design.T @ y
    try:
        w = np.linalg.solve(A, b)
    except np.linalg.LinAlgError:
        return np.linalg.solve(A + ridge * np.eye(len(A)), b)
    residual = A @ w - b
    tol = 1e-6 * max(1.0, float(np.max(np.abs(b))))
    if not np.all(np.isfinite(w)) or float(np.max(np.abs(residual))) > tol:
        return np.linalg.solve(A + ridge * np.eye(len(A)), b)
    return w


def _fill_value(col: Column, how: str):
    if col.kind == CONTINUOUS:
        observed = col.values[~np.isnan(col.values)]
        if observed.size == 0:
            raise ValidationError(f"feature {col.name!r} is entirely missing")
        return float(np.mean(observed) if how == "mean" else np.median(observed))
    observed = [v for v in col.values if v is not None]
    if not observed:
        raise ValidationError(f"feature {col.name!r} is entirely missing")
    counts = Counter(observed)
    top = max(counts.values())
    return min(c for c, n in counts.items() if n == top)  # deterministic mode


def _filled_columns(ds: Dataset, fill_values: dict) -> list[Column]:
    cols = []
    for c in ds.columns:
        mask = c.missing_mask()
        if not mask.any():
            cols.append(replace(c, values=c.values.copy()))
            continue
        values = c.values.copy()
        values[mask] = fill_values[c.name]
        cols.append(replace(c, values=values))
    return cols


def _category_lists(columns: list[Column]) -> dict:
    cats = {}
    for c in columns:
        if c.kind == CATEGORICAL:
            observed = {v for v in c.values}
            declared = set(c.categories) if c.categories is not None else set()
            cats[c.name] = tuple(sorted(observed | declared))
    return cats


def _design_matrix(columns: list[Column], predictors) -> np.ndarray:
    """Intercept + predictors; categoricals expand drop-first so the system stays near full rank."""
    n = len(columns[0].values)
    by_name = {c.name: c for c in columns}
    blocks = [np.ones((n, 1))]
    for name, kind, cats in predictors:
        col = by_name[name]
        if kind == CONTINUOUS:
            blocks.append(col.values.reshape(-1, 1))
        else:
            block = np.zeros((n, len(cats) - 1))
            index = {cat: j - 1 for j, cat in enumerate(cats)}
            for i, v in enumerate(col.values):
                j = index.get(v, -1)  # unseen or baseline category -> all zeros
                if j >= 0:
                    block[i, j] = 1.0
            blocks.append(block)
    return np.hstack(blocks)


def fit_mice(ds: Dataset, plan: ImputePlan | None = None, seed: int = 0) -> tuple[Dataset, FittedImputer]:
    """Run the imputation cycles on training data and freeze the fitted state.

    Parameters
    ----------
    ds : training dataset; target features must be continuous with at least
        one observed value each.
    plan : targets, cycle count, initial fill, ridge fallback strength.
    seed : accepted for interface symmetry; the regression imputation is
        deterministic, so it is unused.

    Returns the fully imputed dataset and a FittedImputer that replays the
    initial-fill statistics and final-cycle regressors on new rows.
    """
    plan = plan or ImputePlan()
    for t in plan.targets:
        col = ds.column(t)
        if col.kind != CONTINUOUS:
            raise ValidationError(f"impute target {t!r} must be a continuous feature")

    # fills are frozen for every column so held-out rows never contribute statistics
    fill_values = {c.name: _fill_value(c, plan.initial_fill) for c in ds.columns}
    originally_missing = {t: ds.column(t).missing_mask() for t in plan.targets}

    columns = _filled_columns(ds, fill_values)
    cats = _category_lists(columns)
    by_name = {c.name: i for i, c in enumerate(columns)}

    predictor_layout = {
        t: tuple(
            (c.name, c.kind, cats.get(c.name))
            for c in columns if c.name != t
        )
        for t in plan.targets
    }

    regressions: dict[str, TargetRegression] = {}
    for _ in range(plan.cycles):
        for t in plan.targets:
            design = _design_matrix(columns, predictor_layout[t])
            y = columns[by_name[t]].values
            observed = ~originally_missing[t]
            coef = solve_least_squares(design[observed], y[observed], plan.ridge)
            regressions[t] = TargetRegression(t, predictor_layout[t], coef)
            miss = originally_missing[t]
            if miss.any():
                values = y.copy()
                values[miss] = design[miss] @ coef
                columns[by_name[t]] = replace(columns[by_name[t]], values=values)

    imputed = Dataset(tuple(columns), ds.labels)
    fitted = FittedImputer(plan, fill_values, tuple(regressions[t] for t in plan.targets))
    return imputed, fitted


def apply_mice(ds: Dataset, fitted: FittedImputer) -> Dataset:
    """Impute new rows with training statistics: initial fill, then one
    pass of the stored final-cycle regressors over each target."""
    columns = _filled_columns(ds, fitted.fill_values)
    by_name = {c.name: i for i, c in enumerate(columns)}
    originally_missing = {t: ds.column(t).missing_mask() for t in fitted.plan.targets}
    for reg in fitted.regressions:
        miss = originally_missing[reg.target]
        if not miss.any():
            continue
        design = _design_matrix(columns, reg.predictors)
        values = columns[by_name[reg.target]].values.copy()
        values[miss] = design[miss] @ reg.coef
        columns[by_name[reg.target]] = replace(columns[by_name[reg.target]], values=values)
    return Dataset(tuple(columns), ds.labels)


def mice_impute(ds: Dataset, plan: ImputePlan | None = None, seed: int = 0) -> Dataset:
    """Impute in place (fit + transform on the same rows)."""
    imputed, _ = fit_mice(ds, plan, seed)
    return imputed
