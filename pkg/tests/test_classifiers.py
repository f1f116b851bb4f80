import numpy as np
import pytest

from conftest import categorical_dataset, xor_dataset
from farnb.autoencoder import AETrainConfig
from farnb.classifiers import FARNB, METHOD_NAMES, NaiveBayes, ShrinkBaseline, WeightedNB, make_method
from farnb.errors import ConfigError, DataError
from farnb.weights import TrainConfig


class TestFactory:
    @pytest.mark.parametrize("name", METHOD_NAMES)
    def test_known(self, name):
        assert make_method(name) is not None

    def test_unknown(self):
        with pytest.raises(ConfigError):
            make_method("svm")

    def test_types(self):
        assert isinstance(make_method("nb"), NaiveBayes)
        assert make_method("cd").mode == "cd"
        assert make_method("farnb", kh=(2, 3)).kh == (2, 3)


class TestMethods:
    def test_weighted_nb_predicts(self, rng):
        d = categorical_dataset(rng, 60, 3, 3, 2)
        fitted = WeightedNB("rnb", TrainConfig(max_iterations=20)).fit(d)
        assert fitted.predict(d).shape == (60,)
        assert len(fitted.weight_history) >= 1

    def test_schema_mismatch(self, rng):
        d = categorical_dataset(rng, 30, 3, 3, 2)
        fitted = NaiveBayes().fit(d)
        with pytest.raises(DataError):
            fitted.predict(xor_dataset(10))

    def test_fixed_kh(self):
        method = FARNB((1, 2), AETrainConfig(epochs=20), TrainConfig(max_iterations=10))
        model = method.fit(xor_dataset(40))
        assert (model.topology.k, model.topology.h) == (1, 2)

    def test_shrink_bottleneck(self):
        model = ShrinkBaseline(AETrainConfig(epochs=20), TrainConfig(max_iterations=10)).fit(xor_dataset(40))
        assert (model.topology.k, model.topology.h) == (1, 1)
        assert model.blocks == ("y",)
