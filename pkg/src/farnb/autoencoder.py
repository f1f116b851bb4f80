"""Shrink/expansion stacked auto-encoder trained by full-batch backprop.

Layer stack for an input ``x`` in [0, 1]^m::

    y  = clamp(Ws  x  + bs)     k units, k <= m   (shrink encoder)
    z  = clamp(We  y  + be)     h units, h >= k   (expansion encoder)
    y~ = sigmoid(Wd1 z + bd1)   k units           (decoder, first stage)
    x~ = sigmoid(Wd2 y~ + bd2)  m units           (decoder, second stage)

Internally instances are rows, so each layer computes ``a @ W.T + b``.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np
from numba import njit
from scipy.special import expit

from .errors import ConfigError, DataError, NumericError

MAX_HALVINGS = 20


@dataclass(frozen=True)
class AETopology:
    m: int
    k: int
    h: int

    def __post_init__(self):
        if not 1 <= self.k <= self.m:
            raise ConfigError(f"need 1 <= k <= m, got k={self.k}, m={self.m}")
        if self.h < self.k:
            raise ConfigError(f"need h >= k, got h={self.h}, k={self.k}")


@dataclass(frozen=True)
class AEParams:
    Ws: np.ndarray
    bs: np.ndarray
    We: np.ndarray
    be: np.ndarray
    Wd1: np.ndarray
    bd1: np.ndarray
    Wd2: np.ndarray
    bd2: np.ndarray

    def __post_init__(self):
        k, m = np.shape(self.Ws)
        h = np.shape(self.We)[0]
        expected = {"Ws": (k, m), "bs": (k,), "We": (h, k), "be": (h,),
                    "Wd1": (k, h), "bd1": (k,), "Wd2": (m, k), "bd2": (m,)}
        for name, shape in expected.items():
            value = np.asarray(getattr(self, name), dtype=float)
            if value.shape != shape:
                raise DataError(f"{name} has shape {value.shape}, expected {shape}")
            if not np.isfinite(value).all():
                raise NumericError(f"{name} contains non-finite values")
            object.__setattr__(self, name, value)

    @property
    def topology(self) -> AETopology:
        k, m = self.Ws.shape
        return AETopology(m, k, self.We.shape[0])

    def blocks(self) -> dict[str, np.ndarray]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def replace(self, **blocks) -> "AEParams":
        return AEParams(**{**self.blocks(), **blocks})



@dataclass(frozen=True)
class AETrainConfig:
    mask_ratio: float = 0.1
    epochs: int = 1000
    learning_rate: float = 0.5
    batch_size: int = 0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.mask_ratio < 1.0:
            raise ConfigError("mask_ratio must lie in [0, 1)")
        if self.epochs < 0 or self.batch_size < 0:
            raise ConfigError("epochs and batch_size must be non-negative")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be positive")


@dataclass(frozen=True)
class AETrainReport:
    initial_loss: float
    final_loss: float
    epochs_run: int


def clamp_activation(x):
    """0 below 0, identity on (0, 1], 1 above 1."""
    return np.clip(x, 0.0, 1.0)


def sigmoid(z):
    return expit(z)


def init_params(topo: AETopology, rng: np.random.Generator) -> AEParams:
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and zero biases."""
    def layer(rows, cols):
        bound = 1.0 / np.sqrt(cols)
        return rng.uniform(-bound, bound, size=(rows, cols)), np.zeros(rows)

    Ws, bs = layer(topo.k, topo.m)
    We, be = layer(topo.h, topo.k)
    Wd1, bd1 = layer(topo.k, topo.h)
    Wd2, bd2 = layer(topo.m, topo.k)
    return AEParams(Ws, bs, We, be, Wd1, bd1, Wd2, bd2)


def _forward(p: AEParams, X):
    a1 = X @ p.Ws.T + p.bs
    y = clamp_activation(a1)
    a2 = y @ p.We.T + p.be
    z = clamp_activation(a2)
    y_rec = sigmoid(z @ p.Wd1.T + p.bd1)
    x_rec = sigmoid(y_rec @ p.Wd2.T + p.bd2)
    return a1, y, a2, z, y_rec, x_rec


def _check_width(p: AEParams, X):
    if X.shape[-1] != p.Ws.shape[1]:
        raise DataError(f"input width {X.shape[-1]} does not match m={p.Ws.shape[1]}")


def forward(params: AEParams, x):
    """Single-instance pass returning ``(y, z, x_rec)``."""
    x = np.asarray(x, dtype=float)
    _check_width(params, x)
    _, y, _, z, _, x_rec = _forward(params, x[None, :])
    return y[0], z[0], x_rec[0]


def mse_loss(x_batch, x_rec_batch) -> float:
    """Mean over instances of the summed squared reconstruction error."""
    x_batch = np.asarray(x_batch, dtype=float)
    x_rec_batch = np.asarray(x_rec_batch, dtype=float)
    if x_batch.shape != x_rec_batch.shape:
        raise DataError(f"shape mismatch {x_batch.shape} vs {x_rec_batch.shape}")
    if x_batch.ndim == 1:
        x_batch, x_rec_batch = x_batch[None, :], x_rec_batch[None, :]
    return float(np.sum((x_batch - x_rec_batch) ** 2) / x_batch.shape[0])


@njit(cache=True)
def _zero_smallest(batch, u, count):
    # zero the coordinates holding the `count` smallest uniforms of each row
    n, m = u.shape
    for i in range(n):
        row = u[i].copy()
        for _ in range(count):
            j = np.argmin(row)
            batch[i, j] = 0.0
            row[j] = np.inf


def mask(x, ratio: float, rng: np.random.Generator):
    """Zero ``floor(ratio * m)`` distinct coordinates of each row of ``x``.

    The coordinates are those with the smallest of ``m`` iid uniforms drawn
    per row, i.e. a uniformly random subset.
    """
    if not 0.0 <= ratio < 1.0:
        raise ConfigError("mask ratio must lie in [0, 1)")
    x = np.array(x, dtype=float)
    batch = x[None, :] if x.ndim == 1 else x
    count = int(np.floor(ratio * batch.shape[1]))
    if count:
        _zero_smallest(batch, rng.random(batch.shape), count)
    return batch[0] if x.ndim == 1 else batch


@njit(cache=True)
def _loss_grad_kernel(Ws, bs, We, be, Wd1, bd1, Wd2, bd2, X_in, X_tgt):
    n = X_in.shape[0]
    a1 = X_in @ Ws.T + bs
    y = np.minimum(np.maximum(a1, 0.0), 1.0)
    a2 = y @ We.T + be
    z = np.minimum(np.maximum(a2, 0.0), 1.0)
    y_rec = 1.0 / (1.0 + np.exp(-(z @ Wd1.T + bd1)))
    x_rec = 1.0 / (1.0 + np.exp(-(y_rec @ Wd2.T + bd2)))
    diff = x_rec - X_tgt
    value = np.sum(diff * diff) / n

    d4 = (2.0 / n) * diff * x_rec * (1.0 - x_rec)
    d3 = (d4 @ Wd2) * y_rec * (1.0 - y_rec)
    # clamp subgradient: 1 strictly inside (0, 1), 0 at and beyond the kinks
    d2 = (d3 @ Wd1) * ((a2 > 0.0) & (a2 < 1.0))
    d1 = (d2 @ We) * ((a1 > 0.0) & (a1 < 1.0))
    return (value, d1.T @ X_in, d1.sum(axis=0), d2.T @ y, d2.sum(axis=0),
            d3.T @ z, d3.sum(axis=0), d4.T @ y_rec, d4.sum(axis=0))


@njit(cache=True)
def _loss_kernel(Ws, bs, We, be, Wd1, bd1, Wd2, bd2, X_in, X_tgt):
    y = np.minimum(np.maximum(X_in @ Ws.T + bs, 0.0), 1.0)
    z = np.minimum(np.maximum(y @ We.T + be, 0.0), 1.0)
    y_rec = 1.0 / (1.0 + np.exp(-(z @ Wd1.T + bd1)))
    x_rec = 1.0 / (1.0 + np.exp(-(y_rec @ Wd2.T + bd2)))
    diff = x_rec - X_tgt
    return np.sum(diff * diff) / X_in.shape[0]


@njit(cache=True)
def _descent_step(Ws, bs, We, be, Wd1, bd1, Wd2, bd2, X_in, X_tgt, lr, max_halvings):
    """One step-halving descent step, updating the parameters in place.

    Returns the loss before the step (NaN aborts the caller).
    """
    value, gWs, gbs, gWe, gbe, gWd1, gbd1, gWd2, gbd2 = _loss_grad_kernel(
        Ws, bs, We, be, Wd1, bd1, Wd2, bd2, X_in, X_tgt)
    if not np.isfinite(value):
        return value
    size = lr
    for _ in range(max_halvings + 1):
        cWs, cbs = Ws - size * gWs, bs - size * gbs
        cWe, cbe = We - size * gWe, be - size * gbe
        cWd1, cbd1 = Wd1 - size * gWd1, bd1 - size * gbd1
        cWd2, cbd2 = Wd2 - size * gWd2, bd2 - size * gbd2
        if _loss_kernel(cWs, cbs, cWe, cbe, cWd1, cbd1, cWd2, cbd2, X_in, X_tgt) <= value:
            Ws[:] = cWs
            bs[:] = cbs
            We[:] = cWe
            be[:] = cbe
            Wd1[:] = cWd1
            bd1[:] = cbd1
            Wd2[:] = cWd2
            bd2[:] = cbd2
            break
        size /= 2.0
    return value


def loss_and_gradients(p: AEParams, X_in, X_target):
    """Reconstruction loss of ``X_target`` from ``X_in`` and a dict of gradient blocks."""
    X_in = np.ascontiguousarray(X_in, dtype=float)
    X_target = np.ascontiguousarray(X_target, dtype=float)
    value, *grads = _loss_grad_kernel(*p.blocks().values(), X_in, X_target)
    return float(value), dict(zip(p.blocks(), grads))


def _reconstruction_loss(p, X_in, X_target):
    return mse_loss(X_target, _forward(p, X_in)[-1])


def train_ae(data, topo: AETopology, config: AETrainConfig = AETrainConfig()):
    """Train on rows of ``data`` (array or numeric Dataset, values in [0, 1]).

    Each epoch masks a fresh random subset of every input row and descends
    on the error of reconstructing the unmasked row.  A step that raises the
    loss is halved (up to 20 times) and skipped if none helps.
    ``batch_size=0`` means full batch.  Returns ``(params, report)``; the
    report's losses are measured on the unmasked data.
    """
    X = np.asarray(getattr(data, "rows", data), dtype=float)
    if X.ndim != 2 or X.shape[1] != topo.m:
        raise DataError(f"training data shaped {X.shape}, topology expects m={topo.m}")
    if X.size and (np.isnan(X).any() or X.min() < 0.0 or X.max() > 1.0):
        raise DataError("auto-encoder inputs must lie in [0, 1]")
    rng = np.random.default_rng(config.seed)
    params = init_params(topo, rng)
    initial = _reconstruction_loss(params, X, X) if X.size else 0.0
    n = X.shape[0]
    batch = config.batch_size if 0 < config.batch_size < n else n

    blocks = {name: np.array(v) for name, v in params.blocks().items()}
    arrays = tuple(blocks.values())
    for epoch in range(config.epochs):
        order = rng.permutation(n) if batch < n else np.arange(n)
        X_masked = mask(X, config.mask_ratio, rng)
        for start in range(0, n, batch):
            rows = order[start:start + batch]
            value = _descent_step(*arrays, X_masked[rows], X[rows],
                                  config.learning_rate, MAX_HALVINGS)
            if not np.isfinite(value):
                raise NumericError(f"auto-encoder loss became {value} at epoch {epoch}")
    params = AEParams(**blocks)

    final = _reconstruction_loss(params, X, X) if X.size else 0.0
    if not np.isfinite(final):
        raise NumericError("auto-encoder training produced a non-finite loss")
    return params, AETrainReport(initial, final, config.epochs)


def encode(params: AEParams, data):
    """Batched pass: codes ``Z`` shaped (h, n) and reconstructions shaped (m, n)."""
    X = np.asarray(getattr(data, "rows", data), dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    _check_width(params, X)
    _, _, _, z, _, x_rec = _forward(params, X)
    return z.T, x_rec.T


def shrink_codes(params: AEParams, data) -> np.ndarray:
    """Shrink-encoder output ``Y`` shaped (n, k)."""
    X = np.asarray(getattr(data, "rows", data), dtype=float)
    _check_width(params, X)
    return _forward(params, X)[1]
