import itertools

import numpy as np
import pytest

from conftest import numeric_dataset
from farnb.dataset import CATEGORICAL, UNSEEN, ColumnSchema, Dataset
from farnb.discretize import (apply_discretizer, class_entropy, equal_frequency_cut_points,
                              fit_discretizer, mdl_cut_points)
from farnb.errors import ConfigError


def brute_force_best_cut(values, labels):
    """Boundary minimizing class-information entropy, by exhaustive search."""
    best, best_cut = np.inf, None
    distinct = sorted(set(values))
    for lo, hi in zip(distinct, distinct[1:]):
        cut = (lo + hi) / 2
        left = [y for v, y in zip(values, labels) if v < cut]
        right = [y for v, y in zip(values, labels) if v > cut]
        e = 0.0
        for part in (left, right):
            counts = [part.count(c) for c in set(labels)]
            e += len(part) / len(values) * -sum(k / len(part) * np.log2(k / len(part)) for k in counts if k)
        if e < best - 1e-12:
            best, best_cut = e, cut
    return best_cut


class TestEntropy:
    def test_values(self):
        assert class_entropy(np.array([5, 5])) == pytest.approx(1.0)
        assert class_entropy(np.array([4, 0])) == 0.0
        assert class_entropy(np.array([0, 0])) == 0.0


class TestMDL:
    def test_perfect_separation(self):
        values = [1.0, 2.0, 2.5, 3.0, 3.5, 4.0, 5.0, 6.0] * 3
        labels = [0 if v < 3.2 else 1 for v in values]
        cuts = mdl_cut_points(values, labels, 2)
        assert cuts == [brute_force_best_cut(values, labels)] == [3.25]

    def test_first_cut_matches_brute_force(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            values = np.round(rng.uniform(0, 10, 60), 1)
            labels = (values + rng.normal(0, 1.5, 60) > 5).astype(int)
            cuts = mdl_cut_points(values, labels, 2)
            if cuts:
                oracle = brute_force_best_cut(values.tolist(), labels.tolist())
                assert oracle in cuts

    def test_uninformative_column_has_no_cut(self):
        rng = np.random.default_rng(0)
        values = rng.uniform(size=40)
        labels = rng.integers(0, 2, 40)
        assert mdl_cut_points(values, labels, 2) == []

    def test_missing_values_ignored(self):
        values = [1, 2, np.nan, 5, 6] * 4
        labels = [0, 0, 1, 1, 1] * 4
        assert mdl_cut_points(values, labels, 2) == [3.5]


class TestEqualFrequency:
    def test_quartiles(self):
        assert equal_frequency_cut_points(np.arange(8.0), 4) == [1.5, 3.5, 5.5]

    def test_fewer_distinct_values_than_bins(self):
        assert equal_frequency_cut_points([1.0, 1.0, 2.0, 2.0], 10) == [1.5]
        assert equal_frequency_cut_points([3.0, 3.0], 10) == []


class TestDiscretizer:
    def test_fallback_to_equal_frequency(self):
        rng = np.random.default_rng(0)
        d = numeric_dataset(rng.uniform(size=(40, 1)), rng.integers(0, 2, 40))
        model = fit_discretizer(d, max_bins=4)
        assert len(model.cut_points[0]) == 3
        out = apply_discretizer(model, d)
        assert set(np.unique(out.rows)) == {0.0, 1.0, 2.0, 3.0}

    def test_missing_category(self):
        d = numeric_dataset([[1.0], [2.0], [np.nan], [5.0], [6.0]] * 4, [0, 0, 1, 1, 1] * 4)
        model = fit_discretizer(d)
        assert model.output_schema[0].categories == ("bin0", "bin1", "?")
        out = apply_discretizer(model, d)
        np.testing.assert_array_equal(out.rows[:5, 0], [0, 0, 2, 1, 1])

    def test_missing_without_training_missing_is_unseen(self):
        d = numeric_dataset([[1.0], [2.0], [5.0], [6.0]] * 5, [0, 0, 1, 1] * 5)
        model = fit_discretizer(d)
        probe = numeric_dataset([[np.nan], [100.0]], [0, 1])
        out = apply_discretizer(model, probe)
        assert out.rows[0, 0] == UNSEEN and out.rows[1, 0] == 1.0

    def test_categorical_passthrough(self):
        schema = (ColumnSchema("c", CATEGORICAL, ("a", "b")),)
        d = Dataset(schema, np.array([[0.0], [1.0], [1.0]]), np.array([0, 1, 1]), ("x", "y"))
        model = fit_discretizer(d)
        assert model.cut_points == (None,)
        np.testing.assert_array_equal(apply_discretizer(model, d).rows, d.rows)

    def test_bin_boundaries_use_training_cuts_only(self):
        d = numeric_dataset([[v] for v in [1.0, 2.0, 5.0, 6.0] * 5], [0, 0, 1, 1] * 5)
        model = fit_discretizer(d)
        probe = numeric_dataset([[3.5], [3.5000001], [-50.0]], [0, 0, 0])
        np.testing.assert_array_equal(apply_discretizer(model, probe).rows[:, 0], [1, 1, 0])

    def test_max_bins_validated(self):
        d = numeric_dataset([[1.0], [2.0]], [0, 1])
        with pytest.raises(ConfigError):
            fit_discretizer(d, max_bins=1)
