"""Categorical naive Bayes with attribute-weighted likelihoods.

Four likelihood models share one table of Laplace-smoothed conditional
probabilities ``P(x_j = v | c)``:

* plain:              sum_j log P(x_j|c)
* class-independent:  sum_j w_j log P(x_j|c)
* class-dependent:    sum_j W[c, j] log P(x_j|c)
* regularized:        sum_j log((1 - alpha) P(x_j|c)**W[c, j] + alpha P(x_j|c)**w_j)

All functions accept a single encoded instance (shape ``(m,)``) or a batch
(shape ``(n, m)``) and return per-class values of shape ``(C,)`` or
``(n, C)`` respectively.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import Dataset
from .errors import ConfigError, DataError


@dataclass(frozen=True)
class NBModel:
    log_prior: np.ndarray
    log_likelihood: tuple[np.ndarray, ...]
    category_counts: tuple[int, ...]
    class_counts: np.ndarray
    _table: np.ndarray = field(init=False, repr=False)
    _offsets: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        # Flatten the per-feature (C, V_j) tables into one (C, sum(V_j + 1))
        # array; slot V_j of each feature holds the unseen-category floor.
        floors = -np.log(self.class_counts + np.asarray(self.category_counts)[:, None])
        blocks = [np.column_stack([t, f]) for t, f in zip(self.log_likelihood, floors)]
        sizes = np.array([v + 1 for v in self.category_counts], dtype=np.int64)
        offsets = np.concatenate([[0], np.cumsum(sizes)[:-1]]).astype(np.int64)
        table = np.hstack(blocks) if blocks else np.empty((len(self.log_prior), 0))
        object.__setattr__(self, "_table", table)
        object.__setattr__(self, "_offsets", offsets)

    @property
    def n_classes(self) -> int:
        return len(self.log_prior)

    @property
    def n_features(self) -> int:
        return len(self.category_counts)

    @property
    def table(self) -> np.ndarray:
        """Flat ``(C, S)`` log-likelihood table over every (feature, value) slot."""
        return self._table

    @property
    def slot_feature(self) -> np.ndarray:
        """Feature index owning each column of :attr:`table`."""
        sizes = np.asarray(self.category_counts, dtype=np.int64) + 1
        return np.repeat(np.arange(self.n_features, dtype=np.int64), sizes)

    def slots(self, x) -> np.ndarray:
        """Column of :attr:`table` used by each cell of a batch, shape ``(n, m)``.

        Missing, negative and out-of-range codes map to the feature's unseen slot.
        """
        x = np.asarray(x, dtype=float)
        if x.ndim != 2 or x.shape[1] != self.n_features:
            raise DataError(
                f"instance has {x.shape[-1]} features, model expects {self.n_features}"
            )
        sizes = np.asarray(self.category_counts, dtype=np.int64)
        codes = np.where(np.isnan(x), -1, x).astype(np.int64)
        codes = np.where((codes < 0) | (codes >= sizes), sizes, codes)
        return codes + self._offsets

    def feature_log_likelihoods(self, x) -> np.ndarray:
        """Gather ``log P(x_j|c)`` for a batch: shape ``(n, C, m)``."""
        return self._table[:, self.slots(x)].transpose(1, 0, 2)


@dataclass(frozen=True)
class WeightParams:
    """Attribute weights: class-dependent ``W`` (C x m), class-independent ``w`` (m), balance ``alpha``."""

    W: np.ndarray
    w: np.ndarray
    alpha: float

    def __post_init__(self):
        W = np.array(self.W, dtype=float)
        w = np.array(self.w, dtype=float)
        if W.ndim != 2 or w.shape != (W.shape[1],):
            raise ConfigError(f"inconsistent weight shapes {W.shape} and {w.shape}")
        if not (np.isfinite(W).all() and np.isfinite(w).all()):
            raise ConfigError("weights must be finite")
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError(f"alpha={self.alpha} outside [0, 1]")
        W.flags.writeable = False
        w.flags.writeable = False
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "alpha", float(self.alpha))

    @classmethod
    def ones(cls, n_classes: int, n_features: int, alpha: float = 0.5) -> "WeightParams":
        return cls(np.ones((n_classes, n_features)), np.ones(n_features), alpha)

    def check(self, model: NBModel):
        if self.W.shape != (model.n_classes, model.n_features):
            raise DataError(
                f"weights shaped {self.W.shape}, model has "
                f"{model.n_classes} classes x {model.n_features} features"
            )


def fit_nb(d: Dataset) -> NBModel:
    """Count-based estimates with add-one smoothing, stored as logs."""
    if d.n == 0:
        raise DataError("cannot fit naive Bayes on an empty dataset")
    if any(c.is_numeric for c in d.schema):
        raise DataError("naive Bayes needs an all-categorical (discretized) dataset")
    y = d.require_labels()
    n_classes = len(d.classes)
    class_counts = np.bincount(y, minlength=n_classes).astype(float)
    log_prior = np.log((class_counts + 1.0) / (d.n + n_classes))

    tables, sizes = [], []
    for j, col in enumerate(d.schema):
        v_j = len(col.categories)
        codes = d.rows[:, j]
        seen = (codes >= 0) & ~np.isnan(codes)
        counts = np.zeros((n_classes, v_j))
        np.add.at(counts, (y[seen], codes[seen].astype(np.int64)), 1.0)
        tables.append(np.log((counts + 1.0) / (class_counts[:, None] + v_j)))
        sizes.append(v_j)
    return NBModel(log_prior, tuple(tables), tuple(sizes), class_counts)


def _batch(x):
    x = np.asarray(x, dtype=float)
    return (x[None, :], True) if x.ndim == 1 else (x, False)


def _out(values, single):
    return values[0] if single else values


def log_likelihood_plain(model: NBModel, x) -> np.ndarray:
    x, single = _batch(x)
    return _out(model.feature_log_likelihoods(x).sum(axis=2), single)


def log_likelihood_weighted_ci(model: NBModel, params: WeightParams, x) -> np.ndarray:
    params.check(model)
    x, single = _batch(x)
    return _out((model.feature_log_likelihoods(x) * params.w).sum(axis=2), single)


def log_likelihood_weighted_cd(model: NBModel, params: WeightParams, x) -> np.ndarray:
    params.check(model)
    x, single = _batch(x)
    return _out((model.feature_log_likelihoods(x) * params.W).sum(axis=2), single)


def regularized_terms(L: np.ndarray, params: WeightParams):
    """Log of each class-dependent and class-independent term, and their log-sum.

    ``L`` is the gathered ``(n, C, m)`` log-likelihood array.
    """
    with np.errstate(divide="ignore"):
        log_cd = np.log1p(-params.alpha) + params.W * L
        log_ci = np.log(params.alpha) + params.w * L
    return log_cd, log_ci, np.logaddexp(log_cd, log_ci)


def log_likelihood_regularized(model: NBModel, params: WeightParams, x) -> np.ndarray:
    params.check(model)
    x, single = _batch(x)
    _, _, log_r = regularized_terms(model.feature_log_likelihoods(x), params)
    return _out(log_r.sum(axis=2), single)


def normalize_log_scores(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=-1, keepdims=True)
    p = np.exp(shifted)
    return p / p.sum(axis=-1, keepdims=True)


def posterior(model: NBModel, params: WeightParams | None, x) -> np.ndarray:
    """Posterior class probabilities under the regularized likelihood.

    ``params=None`` scores with the plain likelihood.
    """
    if params is None:
        ll = log_likelihood_plain(model, x)
    else:
        ll = log_likelihood_regularized(model, params, x)
    return normalize_log_scores(model.log_prior + ll)


def predict(model: NBModel, params: WeightParams | None, x):
    """MAP class index; ties go to the earliest class."""
    return np.argmax(posterior(model, params, x), axis=-1)
