"""Feature-augmented regularized naive Bayes pipeline.

Fitting runs, on training data only: normalize -> train the stacked
auto-encoder -> build ``F = X + Z + X~`` (column concatenation) ->
discretize ``F`` -> count naive Bayes tables -> learn attribute weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import nb
from .autoencoder import AEParams, AETopology, AETrainConfig, AETrainReport, encode, shrink_codes, train_ae
from .dataset import NUMERIC, ColumnSchema, Dataset, NormalizationModel, apply_normalizer, fit_normalizer
from .discretize import DiscretizationModel, apply_discretizer, fit_discretizer
from .errors import ConfigError, DataError
from .evaluation import stratified_folds
from .weights import LossReport, TrainConfig, fit_weights

AUGMENTED = ("x", "z", "xr")
SHRINK_ONLY = ("y",)


def build_features(normalizer: NormalizationModel, ae: AEParams, raw: Dataset,
                   blocks: Sequence[str] = AUGMENTED) -> Dataset:
    """Real-valued feature grid made of the requested blocks, in order.

    ``x`` is the normalized input, ``z`` the expansion codes, ``xr`` the
    reconstruction and ``y`` the shrink codes.
    """
    X = apply_normalizer(normalizer, raw)
    if X.m != ae.topology.m:
        raise DataError(f"normalized width {X.m} does not match auto-encoder m={ae.topology.m}")
    Z, X_rec = encode(ae, X) if X.n else (np.empty((ae.topology.h, 0)), np.empty((X.m, 0)))
    parts, names = [], []
    for block in blocks:
        if block == "x":
            parts.append(X.rows)
            names += [f"x:{c}" for c in normalizer.output_names]
        elif block == "z":
            parts.append(Z.T)
            names += [f"z{i}" for i in range(Z.shape[0])]
        elif block == "xr":
            parts.append(X_rec.T)
            names += [f"xr:{c}" for c in normalizer.output_names]
        elif block == "y":
            parts.append(shrink_codes(ae, X.rows) if X.n else np.empty((0, ae.topology.k)))
            names += [f"y{i}" for i in range(ae.topology.k)]
        else:
            raise ConfigError(f"unknown feature block {block!r}")
    schema = tuple(ColumnSchema(name, NUMERIC) for name in names)
    return Dataset(schema, np.hstack(parts), raw.labels, raw.classes)


def default_kh(m_enc: int, n: int, num_classes: int) -> list[tuple[int, int]]:
    """Candidate (k, h) pairs, shrunk to the smaller half for scarce data."""
    if m_enc < 1:
        raise ConfigError("need at least one input feature")
    m = m_enc
    ks = {math.ceil(m / 4), math.ceil(m / 2), math.ceil(3 * m / 4), m}
    h_cap = max(2 * m, m + 10)
    pairs = {(k, h) for k in ks for h in (k, math.ceil(1.5 * k), 2 * k, 2 * m)
             if 1 <= k <= m and k <= h <= h_cap}
    grid = sorted(pairs)
    if n < 20 * num_classes and len(grid) > 1:
        by_size = sorted(grid, key=lambda kh: (kh[0] + kh[1], kh))
        grid = sorted(by_size[: len(grid) // 2])
    return grid


@dataclass(frozen=True)
class PipelineModel:
    normalizer: NormalizationModel
    ae: AEParams
    discretizer: DiscretizationModel
    nb: nb.NBModel
    weights: nb.WeightParams
    blocks: tuple[str, ...] = AUGMENTED
    classes: tuple[str, ...] = ()
    ae_report: AETrainReport | None = None
    weight_history: tuple[LossReport, ...] = ()

    @property
    def topology(self) -> AETopology:
        return self.ae.topology

    @property
    def feature_width(self) -> int:
        return len(self.discretizer.schema)

    def features(self, raw: Dataset) -> Dataset:
        return apply_discretizer(self.discretizer, build_features(self.normalizer, self.ae, raw, self.blocks))

    def predict(self, raw: Dataset) -> np.ndarray:
        return predict_pipeline(self, raw)


def fit_pipeline(train: Dataset, k: int, h: int, ae_cfg: AETrainConfig = AETrainConfig(),
                 nb_cfg: TrainConfig = TrainConfig(), *, max_bins: int = 10,
                 blocks: Sequence[str] = AUGMENTED) -> PipelineModel:
    if train.n == 0:
        raise DataError("cannot fit a pipeline on an empty training set")
    normalizer = fit_normalizer(train)
    X = apply_normalizer(normalizer, train)
    ae, report = train_ae(X, AETopology(X.m, k, h), ae_cfg)
    F = build_features(normalizer, ae, train, blocks)
    discretizer = fit_discretizer(F, max_bins)
    D = apply_discretizer(discretizer, F)
    model = nb.fit_nb(D)
    weights, history = fit_weights(model, D, nb_cfg)
    return PipelineModel(normalizer, ae, discretizer, model, weights, tuple(blocks),
                         train.classes, report, tuple(history))


def predict_pipeline(model: PipelineModel, x) -> np.ndarray | int:
    """MAP class index for a raw Dataset, or for one encoded raw row."""
    if isinstance(x, Dataset):
        if tuple(x.schema) != tuple(model.normalizer.schema):
            raise DataError("dataset schema does not match the trained pipeline")
        return nb.predict(model.nb, model.weights, model.features(x).rows)
    row = np.asarray(x, dtype=float)
    if row.shape != (len(model.normalizer.schema),):
        raise DataError(f"instance has {row.size} values, pipeline expects "
                        f"{len(model.normalizer.schema)}")
    single = Dataset(model.normalizer.schema, row[None, :], None, model.classes)
    return int(predict_pipeline(model, single)[0])


def select_kh(train: Dataset, grid: Sequence[tuple[int, int]], inner_folds: int = 3,
              seed: int = 0, ae_cfg: AETrainConfig = AETrainConfig(),
              nb_cfg: TrainConfig = TrainConfig(), *, max_bins: int = 10,
              return_scores: bool = False):
    """Pick (k, h) by inner stratified cross-validation on ``train``.

    Highest mean inner accuracy wins; ties go to the smaller k, then the
    smaller h.
    """
    grid = sorted(grid)
    if not grid:
        raise ConfigError("empty (k, h) grid")
    if inner_folds < 2:
        raise ConfigError("inner_folds must be at least 2")
    if len(grid) == 1:
        return (grid[0], {}) if return_scores else grid[0]
    plan = stratified_folds(train, min(inner_folds, train.n), seed)
    labels = train.require_labels()
    splits = list(plan)
    scores = {}
    for k, h in grid:
        accs = []
        for tr, te in splits:
            model = fit_pipeline(train.subset(tr), k, h, ae_cfg, nb_cfg, max_bins=max_bins)
            accs.append(np.mean(predict_pipeline(model, train.subset(te)) == labels[te]))
        scores[k, h] = float(np.mean(accs))
    best = grid[0]
    for pair in grid[1:]:
        if scores[pair] > scores[best]:
            best = pair
    return (best, scores) if return_scores else best
