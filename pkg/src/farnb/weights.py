"""Learning attribute weights by minimizing the posterior squared error.

The loss is ``0.5 * sum_i sum_c (onehot_i(c) - P(c|x_i))**2`` where the
posterior uses the regularized likelihood.  Gradients are derived by the
chain rule through the softmax normalization and the per-feature log-sum of
the two weighted terms.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from numba import njit

from .dataset import Dataset
from .errors import ConfigError, NumericError
from .nb import NBModel, WeightParams

MODES = ("rnb", "ci", "cd")
MAX_HALVINGS = 20


class DegenerateDataWarning(UserWarning):
    """Weight learning was skipped because the data has a single class."""


@dataclass(frozen=True)
class TrainConfig:
    max_iterations: int = 500
    learning_rate: float = 0.1
    convergence_tol: float = 1e-6
    validation_fraction: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.max_iterations < 0:
            raise ConfigError("max_iterations must be non-negative")
        if self.learning_rate <= 0 or self.convergence_tol <= 0:
            raise ConfigError("learning_rate and convergence_tol must be positive")
        if not 0.0 <= self.validation_fraction < 1.0:
            raise ConfigError("validation_fraction must lie in [0, 1)")


@dataclass(frozen=True)
class LossReport:
    iteration: int
    train_loss: float
    validation_accuracy: float


@njit(cache=True)
def _slot_terms(T, slot_feature, W, w, alpha):
    """Per (class, slot) log of the regularized term, its two mixture shares
    and its derivative with respect to alpha.

    Every instance's likelihood is a sum of these terms, so the
    transcendental work scales with the table size, not with ``n``.
    """
    C, S = T.shape
    log_cd_mix = np.log1p(-alpha) if alpha < 1.0 else -np.inf
    log_ci_mix = np.log(alpha) if alpha > 0.0 else -np.inf
    interior = 0.0 < alpha < 1.0
    log_r = np.empty((C, S))
    share_cd = np.empty((C, S))
    share_ci = np.empty((C, S))
    d_alpha = np.empty((C, S))
    for c in range(C):
        for s in range(S):
            j = slot_feature[s]
            l = T[c, s]
            a = log_cd_mix + W[c, j] * l
            b = log_ci_mix + w[j] * l
            # the two shares sum to one; one exp gives both
            if a >= b:
                d = np.exp(b - a)
                log_r[c, s] = a + np.log1p(d)
                share_cd[c, s] = 1.0 / (1.0 + d)
                share_ci[c, s] = d / (1.0 + d)
            else:
                d = np.exp(a - b)
                log_r[c, s] = b + np.log1p(d)
                share_ci[c, s] = 1.0 / (1.0 + d)
                share_cd[c, s] = d / (1.0 + d)
            # d log r / d alpha = (P**w - P**W) / r
            if interior:
                d_alpha[c, s] = share_ci[c, s] / alpha - share_cd[c, s] / (1.0 - alpha)
            else:
                d_alpha[c, s] = np.exp(w[j] * l - log_r[c, s]) - np.exp(W[c, j] * l - log_r[c, s])
    return log_r, share_cd, share_ci, d_alpha


@njit(cache=True)
def _scores_kernel(slots, log_r, log_prior):
    """Unnormalized log posteriors ``log P(c) + log P_R(x|c)``, shape (n, C)."""
    n, m = slots.shape
    C = log_r.shape[0]
    out = np.empty((n, C))
    for i in range(n):
        for c in range(C):
            s = log_prior[c]
            for j in range(m):
                s += log_r[c, slots[i, j]]
            out[i, c] = s
    return out


@njit(cache=True)
def _loss_grad_kernel(slots, T, slot_feature, log_prior, labels, W, w, alpha):
    n, m = slots.shape
    C, S = T.shape
    log_r, share_cd, share_ci, d_alpha = _slot_terms(T, slot_feature, W, w, alpha)
    scores = _scores_kernel(slots, log_r, log_prior)
    # G[c, s]: summed derivative of the loss w.r.t. the log score of class c
    # over the instances that use slot s
    G = np.zeros((C, S))
    value = 0.0
    P = np.empty(C)
    for i in range(n):
        top = scores[i].max()
        total = 0.0
        for c in range(C):
            P[c] = np.exp(scores[i, c] - top)
            total += P[c]
        inner = 0.0
        for c in range(C):
            P[c] /= total
            resid = P[c] - (1.0 if labels[i] == c else 0.0)
            value += 0.5 * resid * resid
            inner += resid * P[c]
        for c in range(C):
            g = P[c] * ((P[c] - (1.0 if labels[i] == c else 0.0)) - inner)
            for j in range(m):
                G[c, slots[i, j]] += g
    dW = np.zeros((C, W.shape[1]))
    dw = np.zeros(W.shape[1])
    dalpha = 0.0
    for c in range(C):
        for s in range(S):
            g = G[c, s]
            if g == 0.0:
                continue
            j = slot_feature[s]
            dW[c, j] += g * share_cd[c, s] * T[c, s]
            dw[j] += g * share_ci[c, s] * T[c, s]
            dalpha += g * d_alpha[c, s]
    return value, dW, dw, dalpha


class _Problem:
    """Slot-encoded training data bound to one NB model."""

    def __init__(self, model: NBModel, slots, labels):
        self.model = model
        self.slots = np.ascontiguousarray(slots, dtype=np.int64)
        self.labels = np.ascontiguousarray(labels, dtype=np.int64)
        self.table = np.ascontiguousarray(model.table)
        self.slot_feature = model.slot_feature

    def loss_and_grad(self, params: WeightParams):
        value, dW, dw, dalpha = _loss_grad_kernel(
            self.slots, self.table, self.slot_feature, self.model.log_prior, self.labels,
            params.W, params.w, params.alpha)
        if not (np.isfinite(value) and np.isfinite(dW).all() and np.isfinite(dw).all()
                and np.isfinite(dalpha)):
            raise NumericError(
                f"non-finite weight loss/gradient (loss={value}, alpha={params.alpha})"
            )
        return float(value), (dW, dw, float(dalpha))

    def accuracy(self, params: WeightParams) -> float:
        if self.labels.size == 0:
            return float("nan")
        log_r = _slot_terms(self.table, self.slot_feature, params.W, params.w, params.alpha)[0]
        scores = _scores_kernel(self.slots, log_r, self.model.log_prior)
        return float(np.mean(np.argmax(scores, axis=1) == self.labels))


def _problem(model: NBModel, params: WeightParams, data: Dataset) -> _Problem:
    params.check(model)
    return _Problem(model, model.slots(data.rows), data.require_labels())


def loss(model: NBModel, params: WeightParams, data: Dataset) -> float:
    if data.n == 0:
        raise ConfigError("loss needs at least one instance")
    return _problem(model, params, data).loss_and_grad(params)[0]


def gradients(model: NBModel, params: WeightParams, data: Dataset):
    """Analytic ``(dW, dw, dalpha)`` of :func:`loss`."""
    return _problem(model, params, data).loss_and_grad(params)[1]


def _validation_split(labels, fraction, rng):
    val = []
    for c in np.unique(labels):
        idx = np.flatnonzero(labels == c)
        take = min(int(round(fraction * idx.size)), idx.size - 1)
        if take > 0:
            val.extend(rng.permutation(idx)[:take].tolist())
    val = np.array(sorted(val), dtype=np.int64)
    train = np.setdiff1d(np.arange(labels.size), val)
    return train, val


def initial_params(model: NBModel, mode: str = "rnb") -> WeightParams:
    alpha = {"rnb": 0.5, "ci": 1.0, "cd": 0.0}[mode]
    return WeightParams.ones(model.n_classes, model.n_features, alpha)


def fit_weights(model: NBModel, data: Dataset, config: TrainConfig = TrainConfig(),
                mode: str = "rnb"):
    """Projected gradient descent on the weights; returns ``(params, history)``.

    ``mode`` selects the free parameters: ``"rnb"`` learns W, w and alpha
    jointly, ``"ci"`` learns only w (alpha fixed at 1) and ``"cd"`` only W
    (alpha fixed at 0).  A step that raises the training loss is halved and
    retried; when no halving helps, training stops.  The returned snapshot is
    the one with the best held-out accuracy, ties going to the lower
    training loss.
    """
    if mode not in MODES:
        raise ConfigError(f"unknown weighting mode {mode!r}")
    params = initial_params(model, mode)
    labels = data.require_labels()
    if np.unique(labels).size < 2:
        warnings.warn("single-class data: attribute weights left at their initial value",
                      DegenerateDataWarning, stacklevel=2)
        return params, []

    rng = np.random.default_rng(config.seed)
    train_idx, val_idx = _validation_split(labels, config.validation_fraction, rng)
    slots = model.slots(data.rows)
    train = _Problem(model, slots[train_idx], labels[train_idx])
    val = _Problem(model, slots[val_idx], labels[val_idx])

    def step(p, grads, size):
        dW, dw, dalpha = grads
        W, w, alpha = p.W, p.w, p.alpha
        if mode in ("rnb", "cd"):
            W = W - size * dW
        if mode in ("rnb", "ci"):
            w = w - size * dw
        if mode == "rnb":
            alpha = min(1.0, max(0.0, alpha - size * dalpha))
        return WeightParams(W, w, alpha)

    current, grads = train.loss_and_grad(params)
    acc = val.accuracy(params)
    history = [LossReport(0, current, acc)]
    best, best_key = params, (acc, -current)

    for it in range(1, config.max_iterations + 1):
        size = config.learning_rate
        for _ in range(MAX_HALVINGS + 1):
            candidate = step(params, grads, size)
            value, cand_grads = train.loss_and_grad(candidate)
            if value <= current:
                break
            size /= 2.0
        else:
            break
        improvement = current - value
        params, current, grads = candidate, value, cand_grads
        acc = val.accuracy(params)
        history.append(LossReport(it, current, acc))
        key = (acc, -current)
        if val.labels.size == 0 or key >= best_key:
            best, best_key = params, key
        if improvement < config.convergence_tol:
            break
    return best, history
