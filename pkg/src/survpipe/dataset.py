"""Typed columnar dataset: labels, cohort filters, deletion rules, splits.

Columns are immutable after construction; every operation returns a new
Dataset that shares column arrays where possible. Missing is None for
categorical cells and NaN for continuous cells. Labels are 1 = positive
(survived beyond the cutoff) and 0 = negative.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ParseError, ValidationError
from .ingest import RawDataset
from .schema import CATEGORICAL, CONTINUOUS

WHITE = "white"
HISPANIC = "hispanic"
MIXED = "mixed"
COHORTS = (WHITE, HISPANIC, MIXED)


@dataclass(frozen=True)
class Column:
    name: str
    kind: str
    values: np.ndarray  # object (str | None) for categorical, float64 (NaN missing) for continuous
    categories: tuple[str, ...] | None = None

    def missing_mask(self) -> np.ndarray:
        if self.kind == CONTINUOUS:
            return np.isnan(self.values)
        return np.array([v is None for v in self.values], dtype=bool)


@dataclass(frozen=True)
class Dataset:
    columns: tuple[Column, ...]
    labels: np.ndarray | None = None

    def __post_init__(self):
        lengths = {len(c.values) for c in self.columns}
        if len(lengths) > 1:
            raise ValidationError("columns have unequal lengths")
        if self.labels is not None and len(self.labels) != self.n_rows:
            raise ValidationError("labels must cover every row")
        for c in self.columns:
            if c.kind == CONTINUOUS and np.isinf(c.values).any():
                raise ValidationError(f"column {c.name!r} contains non-finite values")

    @property
    def n_rows(self) -> int:
        return len(self.columns[0].values) if self.columns else 0

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns)

    def column(self, name: str) -> Column:
        for c in self.columns:
            if c.name == name:
                return c
        raise ValidationError(f"no column named {name!r}")

    def has_column(self, name: str) -> bool:
        return any(c.name == name for c in self.columns)

    def select_rows(self, indices: np.ndarray) -> Dataset:
        cols = tuple(replace(c, values=c.values[indices]) for c in self.columns)
        labels = self.labels[indices] if self.labels is not None else None
        return Dataset(cols, labels)

    def select_features(self, names) -> Dataset:
        missing = [n for n in names if not self.has_column(n)]
        if missing:
            raise ValidationError(f"no column named {missing[0]!r}")
        return Dataset(tuple(self.column(n) for n in names), self.labels)

    def with_labels(self, labels: np.ndarray) -> Dataset:
        return Dataset(self.columns, np.asarray(labels, dtype=np.int8))


def decode(raw: RawDataset) -> Dataset:
    """Convert raw string cells to typed columns; missing cells stay missing."""
    cols = []
    for spec, raw_col in zip(raw.schema.fields, raw.columns):
        if spec.kind == CONTINUOUS:
            values = np.empty(len(raw_col), dtype=np.float64)
            for i, cell in enumerate(raw_col):
                if cell is None:
                    values[i] = np.nan
                else:
                    try:
                        values[i] = float(cell)
                    except ValueError:
                        raise ParseError(
                            f"row {i}, field {spec.name!r}: cannot decode {cell!r} as a number"
                        ) from None
        else:
            values = raw_col.copy()
        cols.append(Column(spec.name, spec.kind, values, spec.categories))
    return Dataset(tuple(cols))


@dataclass(frozen=True)
class LabelRule:
    """Negative iff survival months < cutoff AND cause of death is a target-cancer code."""
    survival_field: str = "survival_months"
    cause_field: str = "cause_of_death"
    cutoff_months: int = 24
    cause_codes: frozenset[str] = frozenset({"C18"})

    def __post_init__(self):
        if self.cutoff_months < 1:
            raise ValidationError("cutoff_months must be >= 1")
        if not self.cause_codes:
            raise ValidationError("cause_codes must be non-empty")


def derive_labels(ds: Dataset, rule: LabelRule) -> Dataset:
    """Attach binary outcome labels; rows with missing survival months are dropped."""
    surv = ds.column(rule.survival_field)
    cause = ds.column(rule.cause_field)
    if surv.kind != CONTINUOUS:
        raise ValidationError(f"survival field {rule.survival_field!r} must be continuous")
    keep = ~surv.missing_mask()
    kept = ds.select_rows(np.flatnonzero(keep))
    months = kept.column(rule.survival_field).values
    causes = kept.column(rule.cause_field).values
    died_of_target = np.array([c in rule.cause_codes for c in causes], dtype=bool)
    negative = (months < rule.cutoff_months) & died_of_target
    return kept.with_labels((~negative).astype(np.int8))


def drop_required_missing(ds: Dataset, fields) -> Dataset:
    """Delete every row that is missing any of the named required fields."""
    keep = np.ones(ds.n_rows, dtype=bool)
    for name in fields:
        keep &= ~ds.column(name).missing_mask()
    return ds.select_rows(np.flatnonzero(keep))


@dataclass(frozen=True)
class CohortRule:
    """Classify each row as white / hispanic / excluded from two recode fields.

    A row is hispanic when the origin code is in hispanic_origin_codes; white
    when the race code is in white_race_codes and the origin code is in
    non_hispanic_codes. The two code sets must be disjoint so the cohorts are.
    """
    race_field: str = "race_recode"
    origin_field: str = "hispanic_origin"
    white_race_codes: frozenset[str] = frozenset({"1"})
    non_hispanic_codes: frozenset[str] = frozenset({"0"})
    hispanic_origin_codes: frozenset[str] = frozenset({"1", "2"})

    def __post_init__(self):
        if self.non_hispanic_codes & self.hispanic_origin_codes:
            raise ValidationError("non-hispanic and hispanic origin codes overlap")

    def assign(self, race, origin) -> str | None:
        """Return 'white', 'hispanic', or None (excluded). Missing cells exclude."""
        if origin is not None and origin in self.hispanic_origin_codes:
            return HISPANIC
        if race is not None and origin is not None \
                and race in self.white_race_codes and origin in self.non_hispanic_codes:
            return WHITE
        return None


def cohort_assignments(ds: Dataset, rule: CohortRule) -> np.ndarray:
    race = ds.column(rule.race_field).values
    origin = ds.column(rule.origin_field).values
    return np.array([rule.assign(r, o) for r, o in zip(race, origin)], dtype=object)


def filter_cohort(ds: Dataset, rule: CohortRule, which: str) -> Dataset:
    """Select the rows of one cohort; mixed = white ∪ hispanic, excluded rows never appear."""
    if which not in COHORTS:
        raise ValidationError(f"unknown cohort {which!r}, expected one of {COHORTS}")
    assigned = cohort_assignments(ds, rule)
    if which == MIXED:
        keep = (assigned == WHITE) | (assigned == HISPANIC)
    else:
        keep = assigned == which
    return ds.select_rows(np.flatnonzero(keep))


def split_indices(n_rows: int, test_fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    if not 0.0 < test_fraction < 1.0:
        raise ValidationError("test_fraction must lie strictly between 0 and 1")
    rng = np.random.default_rng(seed)
    order = rng.permutation(n_rows)
    n_test = int(round(n_rows * test_fraction))
    test = np.sort(order[:n_test])
    train = np.sort(order[n_test:])
    return train, test


def split(ds: Dataset, test_fraction: float = 0.2, seed: int = 0) -> tuple[Dataset, Dataset]:
    """Random disjoint train/test split of a labeled dataset; deterministic per seed."""
    if ds.labels is None:
        raise ValidationError("split requires a labeled dataset")
    train_idx, test_idx = split_indices(ds.n_rows, test_fraction, seed)
    return ds.select_rows(train_idx), ds.select_rows(test_idx)


def kfold_indices(labels: np.ndarray, k: int, seed: int, stratified: bool = True) -> list[np.ndarray]:
    """Partition row indices into k disjoint folds.

    Stratified folds deal each class round-robin after a seeded shuffle, so
    every fold's positive count is within one row of the proportional share.
    """
    labels = np.asarray(labels)
    n = len(labels)
    if not 2 <= k <= n:
        raise ValidationError(f"k={k} must satisfy 2 <= k <= {n}")
    rng = np.random.default_rng(seed)
    if stratified:
        folds = [[] for _ in range(k)]
        for cls in (0, 1):
            idx = np.flatnonzero(labels == cls)
            if 0 < len(idx) < k:
                raise ValidationError(f"stratified k={k} exceeds class {cls} count {len(idx)}")
            idx = idx[rng.permutation(len(idx))]
            for f in range(k):
                folds[f].extend(idx[f::k])
        return [np.sort(np.array(f, dtype=np.int64)) for f in folds]
    order = rng.permutation(n)
    return [np.sort(part) for part in np.array_split(order, k)]


def kfold(ds: Dataset, k: int = 5, seed: int = 0, stratified: bool = True) -> list[Dataset]:
    if ds.labels is None:
        raise ValidationError("kfold requires a labeled dataset")
    return [ds.select_rows(idx) for idx in kfold_indices(ds.labels, k, seed, stratified)]
