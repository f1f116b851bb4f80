import numpy as np
import pytest

from farnb.dataset import CATEGORICAL, NUMERIC, ColumnSchema, Dataset


def categorical_dataset(rng, n, m, n_cats, n_classes):
    """Random all-categorical dataset; every class appears at least once."""
    cats = [int(rng.integers(2, n_cats + 1)) for _ in range(m)]
    schema = tuple(ColumnSchema(f"f{j}", CATEGORICAL, tuple(f"v{v}" for v in range(c)))
                   for j, c in enumerate(cats))
    rows = np.column_stack([rng.integers(0, c, size=n) for c in cats]).astype(float)
    labels = rng.integers(0, n_classes, size=n)
    labels[:n_classes] = np.arange(n_classes)
    return Dataset(schema, rows, labels, tuple(f"c{c}" for c in range(n_classes)))


def numeric_dataset(X, y, classes=None):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    classes = classes or tuple(str(c) for c in range(int(y.max()) + 1))
    schema = tuple(ColumnSchema(f"x{j}", NUMERIC) for j in range(X.shape[1]))
    return Dataset(schema, X, y, classes)


def xor_dataset(n=200, seed=0, noise=0.0):
    """Two uniform features; the label is the XOR of their halves."""
    rng = np.random.default_rng(seed)
    X = rng.uniform(0.0, 1.0, size=(n, 2))
    y = ((X[:, 0] > 0.5) ^ (X[:, 1] > 0.5)).astype(int)
    if noise:
        flip = rng.random(n) < noise
        y = np.where(flip, 1 - y, y)
    return numeric_dataset(X, y)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
