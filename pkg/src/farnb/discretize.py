"""Supervised discretization of numeric columns for naive Bayes.

Numeric columns are split with the recursive minimum-description-length
entropy criterion of Fayyad and Irani.  Columns where the criterion accepts
no cut fall back to equal-frequency bins.  Categorical columns pass through
unchanged.  A column that contained missing cells during fitting gains an
extra ``?`` category that absorbs them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dataset import CATEGORICAL, UNSEEN, ColumnSchema, Dataset
from .errors import ConfigError, DataError

MISSING_CATEGORY = "?"


def class_entropy(counts: np.ndarray) -> np.ndarray:
    """Base-2 entropy of class-count vectors along the last axis."""
    counts = np.asarray(counts, dtype=float)
    total = counts.sum(axis=-1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(total > 0, counts / total, 0.0)
        terms = np.where(p > 0, p * np.log2(p), 0.0)
    return -terms.sum(axis=-1)


def _best_split(values, onehot):
    """Index ``i`` (split before sorted position ``i``) minimizing class entropy."""
    n = len(values)
    candidates = np.flatnonzero(values[1:] > values[:-1]) + 1
    if candidates.size == 0:
        return None
    cum = np.cumsum(onehot, axis=0)
    left = cum[candidates - 1]
    right = cum[-1] - left
    weighted = (candidates * class_entropy(left) + (n - candidates) * class_entropy(right)) / n
    return int(candidates[np.argmin(weighted)])


def _mdl_accepts(onehot, split) -> bool:
    n = onehot.shape[0]
    whole, left, right = onehot.sum(0), onehot[:split].sum(0), onehot[split:].sum(0)
    ent, ent1, ent2 = class_entropy(whole), class_entropy(left), class_entropy(right)
    k, k1, k2 = (int(np.count_nonzero(c)) for c in (whole, left, right))
    gain = ent - (split * ent1 + (n - split) * ent2) / n
    delta = math.log2(3**k - 2) - (k * ent - k1 * ent1 - k2 * ent2)
    return gain > (math.log2(n - 1) + delta) / n


def mdl_cut_points(values, labels, n_classes: int) -> list[float]:
    """Recursive MDL cut points for one numeric column (missing values excluded)."""
    values = np.asarray(values, dtype=float)
    labels = np.asarray(labels)
    keep = ~np.isnan(values)
    values, labels = values[keep], labels[keep]
    order = np.argsort(values, kind="stable")
    values = values[order]
    onehot = np.eye(n_classes)[labels[order]]

    cuts = []
    stack = [(0, len(values))]
    while stack:
        lo, hi = stack.pop()
        if hi - lo < 2:
            continue
        split = _best_split(values[lo:hi], onehot[lo:hi])
        if split is None or not _mdl_accepts(onehot[lo:hi], split):
            continue
        cuts.append((values[lo + split - 1] + values[lo + split]) / 2.0)
        stack.append((lo + split, hi))
        stack.append((lo, lo + split))
    return sorted(cuts)


def equal_frequency_cut_points(values, max_bins: int) -> list[float]:
    values = np.sort(np.asarray(values, dtype=float)[~np.isnan(values)])
    bins = min(max_bins, np.unique(values).size)
    if bins <= 1:
        return []
    idx = (np.arange(1, bins) * values.size) // bins
    below, above = values[idx - 1], values[idx]
    cuts = (below + above)[below < above] / 2.0
    return sorted(set(cuts.tolist()))


@dataclass(frozen=True)
class DiscretizationModel:
    schema: tuple[ColumnSchema, ...]
    cut_points: tuple[tuple[float, ...] | None, ...]
    has_missing: tuple[bool, ...]
    output_schema: tuple[ColumnSchema, ...] = field(init=False)

    def __post_init__(self):
        out = []
        for col, cuts, missing in zip(self.schema, self.cut_points, self.has_missing):
            if cuts is None:
                cats = col.categories
            else:
                if any(b <= a for a, b in zip(cuts, cuts[1:])):
                    raise DataError(f"cut points of {col.name!r} are not strictly increasing")
                cats = tuple(f"bin{b}" for b in range(len(cuts) + 1))
            if missing:
                cats = cats + (MISSING_CATEGORY,)
            out.append(ColumnSchema(col.name, CATEGORICAL, cats))
        object.__setattr__(self, "output_schema", tuple(out))

    def bin_counts(self) -> list[int]:
        return [len(c.categories) for c in self.output_schema]


def fit_discretizer(d: Dataset, max_bins: int = 10) -> DiscretizationModel:
    if max_bins < 2:
        raise ConfigError("max_bins must be at least 2")
    if d.n == 0:
        raise DataError("cannot fit a discretizer on an empty dataset")
    labels = d.require_labels()
    cuts, missing = [], []
    for j, col in enumerate(d.schema):
        v = d.rows[:, j]
        missing.append(bool(np.isnan(v).any()))
        if not col.is_numeric:
            cuts.append(None)
            continue
        c = mdl_cut_points(v, labels, len(d.classes))
        if not c:
            c = equal_frequency_cut_points(v, max_bins)
        cuts.append(tuple(float(x) for x in c))
    return DiscretizationModel(tuple(d.schema), tuple(cuts), tuple(missing))


def apply_discretizer(model: DiscretizationModel, d: Dataset) -> Dataset:
    """Replace numeric values by bin indices; the result is all-categorical."""
    if tuple(d.schema) != model.schema:
        raise DataError("dataset schema does not match the discretizer")
    grid = np.empty_like(d.rows)
    for j, (cuts, out) in enumerate(zip(model.cut_points, model.output_schema)):
        v = d.rows[:, j]
        nan = np.isnan(v)
        if cuts is None:
            col = v.copy()
        else:
            col = np.searchsorted(np.asarray(cuts), np.where(nan, 0.0, v), side="right").astype(float)
        if model.has_missing[j]:
            col[nan] = len(out.categories) - 1
        else:
            col[nan] = UNSEEN
        grid[:, j] = col
    return Dataset(model.output_schema, grid, d.labels, d.classes)
