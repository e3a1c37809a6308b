import numpy as np
import pytest

from survpipe.dataset import Column, Dataset
from survpipe.encoding import EncodedMatrix, FeatureMap, FeatureRange
from survpipe.schema import CATEGORICAL, CONTINUOUS


def matrix_from_xy(X, y=None):
    """Wrap a plain array as an EncodedMatrix of continuous features."""
    X = np.asarray(X, dtype=np.float64)
    feats = tuple(FeatureRange(f"f{j}", CONTINUOUS, j, j + 1) for j in range(X.shape[1]))
    labels = None if y is None else np.asarray(y, dtype=np.int8)
    return EncodedMatrix(X, FeatureMap(feats), labels)


def make_dataset(columns, labels=None):
    """columns: list of (name, kind, values[, categories]) tuples."""
    cols = []
    for spec in columns:
        name, kind, values = spec[:3]
        categories = spec[3] if len(spec) > 3 else None
        if kind == CONTINUOUS:
            arr = np.array([np.nan if v is None else float(v) for v in values])
        else:
            arr = np.array(values, dtype=object)
        cols.append(Column(name, kind, arr, categories))
    lab = None if labels is None else np.asarray(labels, dtype=np.int8)
    return Dataset(tuple(cols), lab)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
