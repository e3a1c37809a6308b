"""One-hot encoding into a dense design matrix, with a feature→column map.

The FeatureMap is the contract between preprocessing, the models, and the
importance aggregation: every original feature owns one contiguous column
range (one column per category, or a single column for a continuous
feature), and the ranges partition [0, n_columns).
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .errors import ValidationError
from .schema import CATEGORICAL, CONTINUOUS


@dataclass(frozen=True)
class FeatureRange:
    name: str
    kind: str
    start: int
    stop: int
    categories: tuple[str, ...] | None = None


@dataclass(frozen=True)
class FeatureMap:
    features: tuple[FeatureRange, ...]

    @property
    def n_columns(self) -> int:
        return self.features[-1].stop if self.features else 0

    def feature(self, name: str) -> FeatureRange:
        for f in self.features:
            if f.name == name:
                return f
        raise ValidationError(f"no feature named {name!r} in map")

    def column_names(self) -> list[str]:
        names = []
        for f in self.features:
            if f.kind == CATEGORICAL:
                names.extend(f"{f.name}={c}" for c in f.categories)
            else:
                names.append(f.name)
        return names

    def to_json(self) -> str:
        payload = [
            {"name": f.name, "kind": f.kind, "start": f.start, "stop": f.stop,
             "categories": list(f.categories) if f.categories is not None else None}
            for f in self.features
        ]
        return json.dumps({"features": payload}, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "FeatureMap":
        payload = json.loads(text)
        feats = tuple(
            FeatureRange(d["name"], d["kind"], d["start"], d["stop"],
                         tuple(d["categories"]) if d["categories"] is not None else None)
            for d in payload["features"]
        )
        return cls(feats)

    def fingerprint(self) -> int:
        """Stable 64-bit digest of the map layout; models refuse mismatched matrices."""
        digest = hashlib.sha256(self.to_json().encode()).digest()
        return int.from_bytes(digest[:8], "little")


@dataclass(frozen=True)
class EncodedMatrix:
    X: np.ndarray  # (n_rows, n_columns) float64, row-major
    feature_map: FeatureMap
    labels: np.ndarray | None = None

    def __post_init__(self):
        if self.X.ndim != 2:
            raise ValidationError("design matrix must be 2-D")
        if self.X.shape[1] != self.feature_map.n_columns:
            raise ValidationError("matrix width disagrees with feature map")
        if self.labels is not None and len(self.labels) != self.X.shape[0]:
            raise ValidationError("labels must cover every row")

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]

    @property
    def n_columns(self) -> int:
        return self.X.shape[1]

    def select_rows(self, indices: np.ndarray) -> "EncodedMatrix":
        labels = self.labels[indices] if self.labels is not None else None
        return EncodedMatrix(self.X[indices], self.feature_map, labels)


def fit_encoder(ds: Dataset) -> FeatureMap:
    """Build the feature map: observed categories union schema-declared ones, sorted."""
    feats = []
    col = 0
    for c in ds.columns:
        if c.kind == CATEGORICAL:
            observed = {v for v in c.values if v is not None}
            declared = set(c.categories) if c.categories is not None else set()
            cats = tuple(sorted(observed | declared))
            if not cats:
                raise ValidationError(f"feature {c.name!r} has no observed or declared categories")
            feats.append(FeatureRange(c.name, CATEGORICAL, col, col + len(cats), cats))
            col += len(cats)
        else:
            feats.append(FeatureRange(c.name, CONTINUOUS, col, col + 1))
            col += 1
    return FeatureMap(tuple(feats))


def encode(ds: Dataset, fmap: FeatureMap) -> EncodedMatrix:
    """One-hot encode a fully imputed dataset against a fitted map.

    Every categorical row slice carries exactly one 1, except rows whose
    category was never seen at fit time, which encode as all zeros. Missing
    cells are an error (impute first).
    """
    n = ds.n_rows
    X = np.zeros((n, fmap.n_columns), dtype=np.float64)
    for f in fmap.features:
        if not ds.has_column(f.name):
            raise ValidationError(f"dataset lacks feature {f.name!r} required by the map")
        col = ds.column(f.name)
        miss = col.missing_mask()
        if miss.any():
            raise ValidationError(
                f"feature {f.name!r} still has {int(miss.sum())} missing cells at encode time"
            )
        if f.kind == CATEGORICAL:
            index = {cat: f.start + j for j, cat in enumerate(f.categories)}
            for i, v in enumerate(col.values):
                j = index.get(v)
                if j is not None:
                    X[i, j] = 1.0
        else:
            X[:, f.start] = col.values
    return EncodedMatrix(X, fmap, ds.labels)


@dataclass(frozen=True)
class Standardizer:
    """Per-column center/scale fitted on training rows; one-hot columns untouched."""
    means: np.ndarray
    scales: np.ndarray

    def transform(self, matrix: EncodedMatrix) -> EncodedMatrix:
        if matrix.n_columns != len(self.means):
            raise ValidationError("standardizer was fitted for a different matrix width")
        X = (matrix.X - self.means) / self.scales
        return EncodedMatrix(X, matrix.feature_map, matrix.labels)


def fit_standardizer(matrix: EncodedMatrix) -> Standardizer:
    """Fit population-SD statistics on the continuous columns of training rows."""
    means = np.zeros(matrix.n_columns)
    scales = np.ones(matrix.n_columns)
    for f in matrix.feature_map.features:
        if f.kind != CONTINUOUS:
            continue
        col = matrix.X[:, f.start]
        means[f.start] = col.mean()
        sd = col.std()  # population (ddof=0)
        if sd > 0:
            scales[f.start] = sd
    return Standardizer(means, scales)


def standardize(matrix: EncodedMatrix) -> EncodedMatrix:
    """Fit on the given rows and transform them (training-side convenience)."""
    return fit_standardizer(matrix).transform(matrix)
