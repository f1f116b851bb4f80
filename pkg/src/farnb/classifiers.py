"""Named classifier variants compared by the benchmark.

Every method is an immutable configuration whose ``fit(train)`` returns a
fitted model exposing ``predict(dataset) -> class indices``.

========  ===========================================================
nb        plain naive Bayes on discretized raw features
ci        class-independent attribute weights (alpha fixed at 1)
cd        class-dependent attribute weights (alpha fixed at 0)
rnb       regularized weights on discretized raw features
farnb     auto-encoder augmented features + regularized weights
shrink    shrink-only auto-encoder codes (k = ceil(m/2)) + regularized weights
========  ===========================================================
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import nb
from .augment import SHRINK_ONLY, default_kh, fit_pipeline, select_kh
from .autoencoder import AETrainConfig
from .dataset import Dataset, fit_normalizer
from .discretize import DiscretizationModel, apply_discretizer, fit_discretizer
from .errors import ConfigError, DataError
from .weights import LossReport, TrainConfig, fit_weights

METHOD_NAMES = ("nb", "ci", "cd", "rnb", "farnb", "shrink")


@dataclass(frozen=True)
class FittedNB:
    discretizer: DiscretizationModel
    nb: nb.NBModel
    weights: nb.WeightParams | None
    weight_history: tuple[LossReport, ...] = ()

    def predict(self, raw: Dataset) -> np.ndarray:
        if tuple(raw.schema) != self.discretizer.schema:
            raise DataError("dataset schema does not match the fitted model")
        return nb.predict(self.nb, self.weights, apply_discretizer(self.discretizer, raw).rows)


@dataclass(frozen=True)
class NaiveBayes:
    max_bins: int = 10

    def fit(self, train: Dataset) -> FittedNB:
        disc = fit_discretizer(train, self.max_bins)
        return FittedNB(disc, nb.fit_nb(apply_discretizer(disc, train)), None)


@dataclass(frozen=True)
class WeightedNB:
    mode: str = "rnb"
    weight_cfg: TrainConfig = field(default_factory=TrainConfig)
    max_bins: int = 10

    def fit(self, train: Dataset) -> FittedNB:
        disc = fit_discretizer(train, self.max_bins)
        D = apply_discretizer(disc, train)
        model = nb.fit_nb(D)
        weights, history = fit_weights(model, D, self.weight_cfg, mode=self.mode)
        return FittedNB(disc, model, weights, tuple(history))


@dataclass(frozen=True)
class FARNB:
    """``kh`` is a fixed ``(k, h)`` pair or ``"auto"`` for inner-CV selection."""

    kh: str | tuple[int, int] = "auto"
    ae_cfg: AETrainConfig = field(default_factory=AETrainConfig)
    weight_cfg: TrainConfig = field(default_factory=TrainConfig)
    inner_folds: int = 3
    seed: int = 0
    max_bins: int = 10

    def choose_kh(self, train: Dataset) -> tuple[int, int]:
        if self.kh != "auto":
            return tuple(self.kh)
        m_enc = fit_normalizer(train).width
        grid = default_kh(m_enc, train.n, len(train.classes))
        return select_kh(train, grid, self.inner_folds, self.seed, self.ae_cfg,
                         self.weight_cfg, max_bins=self.max_bins)

    def fit(self, train: Dataset):
        k, h = self.choose_kh(train)
        return fit_pipeline(train, k, h, self.ae_cfg, self.weight_cfg, max_bins=self.max_bins)


@dataclass(frozen=True)
class ShrinkBaseline:
    ae_cfg: AETrainConfig = field(default_factory=AETrainConfig)
    weight_cfg: TrainConfig = field(default_factory=TrainConfig)
    max_bins: int = 10

    def fit(self, train: Dataset):
        k = math.ceil(fit_normalizer(train).width / 2)
        return fit_pipeline(train, k, k, self.ae_cfg, self.weight_cfg,
                            max_bins=self.max_bins, blocks=SHRINK_ONLY)


def make_method(name: str, *, kh="auto", ae_cfg: AETrainConfig | None = None,
                weight_cfg: TrainConfig | None = None, inner_folds: int = 3,
                seed: int = 0, max_bins: int = 10):
    ae_cfg = ae_cfg or AETrainConfig(seed=seed)
    weight_cfg = weight_cfg or TrainConfig(seed=seed)
    if name == "nb":
        return NaiveBayes(max_bins)
    if name in ("ci", "cd", "rnb"):
        return WeightedNB(name, weight_cfg, max_bins)
    if name == "farnb":
        return FARNB(kh, ae_cfg, weight_cfg, inner_folds, seed, max_bins)
    if name == "shrink":
        return ShrinkBaseline(ae_cfg, weight_cfg, max_bins)
    raise ConfigError(f"unknown method {name!r}; choose from {', '.join(METHOD_NAMES)}")
