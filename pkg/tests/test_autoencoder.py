import numpy as np
import pytest

from farnb import autoencoder as ae
from farnb.autoencoder import AETopology, AETrainConfig
from farnb.errors import ConfigError, DataError

KINK_GAP = 1e-3


def away_from_kinks(p, X):
    """Rows whose clamp pre-activations are all at least KINK_GAP from 0 and 1."""
    a1, _, a2, *_ = ae._forward(p, X)
    pre = np.hstack([a1, a2])
    gap = np.minimum(np.abs(pre), np.abs(pre - 1.0)).min(axis=1)
    return X[gap > KINK_GAP]


def loss_numpy(p, X_in, X_target):
    # independent route: plain numpy forward pass and the mean summed error
    return float(np.sum((X_target - ae._forward(p, X_in)[-1]) ** 2) / X_in.shape[0])


class TestActivations:
    def test_clamp_values(self):
        np.testing.assert_array_equal(ae.clamp_activation(np.array([-0.5, 0.3, 1.7])), [0.0, 0.3, 1.0])

    def test_sigmoid_zero(self):
        assert ae.sigmoid(0.0) == 0.5

    def test_sigmoid_extremes_finite(self):
        out = ae.sigmoid(np.array([-1000.0, 1000.0]))
        assert np.all(np.isfinite(out))


class TestTopology:
    def test_rejects_invalid(self):
        with pytest.raises(ConfigError):
            AETopology(3, 4, 4)
        with pytest.raises(ConfigError):
            AETopology(3, 2, 1)
        with pytest.raises(ConfigError):
            AETopology(3, 0, 1)

    def test_param_shapes(self, rng):
        p = ae.init_params(AETopology(5, 2, 7), rng)
        assert p.Ws.shape == (2, 5) and p.We.shape == (7, 2)
        assert p.Wd1.shape == (2, 7) and p.Wd2.shape == (5, 2)
        assert p.topology == AETopology(5, 2, 7)

    def test_param_shape_mismatch(self, rng):
        p = ae.init_params(AETopology(5, 2, 7), rng)
        with pytest.raises(DataError):
            p.replace(bs=np.zeros(3))


class TestForward:
    def test_ranges(self, rng):
        p = ae.init_params(AETopology(4, 2, 3), rng)
        p = p.replace(Ws=p.Ws * 5, bs=np.full(2, 0.3))
        for x in rng.uniform(size=(20, 4)):
            y, z, x_rec = ae.forward(p, x)
            assert y.shape == (2,) and z.shape == (3,) and x_rec.shape == (4,)
            assert np.all((0 <= y) & (y <= 1)) and np.all((0 <= z) & (z <= 1))
            assert np.all((0 < x_rec) & (x_rec < 1))

    def test_batch_matches_loop(self, rng):
        p = ae.init_params(AETopology(4, 3, 6), rng)
        X = rng.uniform(size=(15, 4))
        Z, X_rec = ae.encode(p, X)
        assert Z.shape == (6, 15) and X_rec.shape == (4, 15)
        for i, x in enumerate(X):
            _, z, x_rec = ae.forward(p, x)
            np.testing.assert_allclose(Z[:, i], z, atol=1e-15)
            np.testing.assert_allclose(X_rec[:, i], x_rec, atol=1e-15)

    def test_width_mismatch(self, rng):
        p = ae.init_params(AETopology(4, 2, 3), rng)
        with pytest.raises(DataError):
            ae.forward(p, np.zeros(3))

    def test_mse_single_row(self):
        assert ae.mse_loss([0.0, 1.0], [0.5, 0.5]) == 0.5

    def test_mse_is_mean_over_instances(self):
        X = np.zeros((4, 3))
        R = np.ones((4, 3))
        assert ae.mse_loss(X, R) == 3.0


class TestMask:
    def test_count_and_positions(self, rng):
        X = rng.uniform(0.1, 1.0, size=(50, 10))
        M = ae.mask(X, 0.3, rng)
        zeroed = M == 0.0
        assert np.all(zeroed.sum(axis=1) == 3)
        np.testing.assert_array_equal(M[~zeroed], X[~zeroed])

    def test_small_ratio_masks_nothing(self, rng):
        X = rng.uniform(size=(5, 4))
        np.testing.assert_array_equal(ae.mask(X, 0.2, rng), X)

    def test_does_not_modify_input(self, rng):
        X = rng.uniform(0.1, 1.0, size=(5, 10))
        before = X.copy()
        ae.mask(X, 0.5, rng)
        np.testing.assert_array_equal(X, before)

    def test_rejects_ratio(self, rng):
        with pytest.raises(ConfigError):
            ae.mask(np.ones(3), 1.0, rng)


class TestGradients:
    @pytest.mark.parametrize("seed", range(10))
    def test_matches_finite_differences(self, seed):
        rng = np.random.default_rng(seed)
        m, k, h = 5, 3, 6
        p = ae.init_params(AETopology(m, k, h), rng)
        # push pre-activations into the linear part of the clamp
        p = p.replace(bs=np.full(k, 0.5), be=np.full(h, 0.5))
        X = away_from_kinks(p, rng.uniform(size=(30, m)))
        assert X.shape[0] >= 5
        X_in = ae.mask(X, 0.2, rng)
        X_in = away_from_kinks(p, X_in)
        X_tgt = X[: X_in.shape[0]]
        value, grads = ae.loss_and_gradients(p, X_in, X_tgt)
        assert value == pytest.approx(loss_numpy(p, X_in, X_tgt), rel=1e-12)
        eps = 1e-6
        for name, block in p.blocks().items():
            numeric = np.zeros_like(block)
            for idx in np.ndindex(block.shape):
                up, dn = block.copy(), block.copy()
                up[idx] += eps
                dn[idx] -= eps
                numeric[idx] = (loss_numpy(p.replace(**{name: up}), X_in, X_tgt)
                                - loss_numpy(p.replace(**{name: dn}), X_in, X_tgt)) / (2 * eps)
            np.testing.assert_allclose(grads[name], numeric, rtol=1e-4, atol=1e-8, err_msg=name)

    def test_saturated_units_pass_no_gradient(self, rng):
        p = ae.init_params(AETopology(3, 2, 2), rng)
        p = p.replace(bs=np.full(2, -10.0))
        X = rng.uniform(size=(10, 3))
        _, grads = ae.loss_and_gradients(p, X, X)
        np.testing.assert_array_equal(grads["Ws"], 0.0)
        np.testing.assert_array_equal(grads["We"], 0.0)


class TestTraining:
    def test_loss_decreases(self, rng):
        X = rng.uniform(size=(60, 4))
        params, report = ae.train_ae(X, AETopology(4, 2, 4), AETrainConfig(epochs=200))
        assert report.final_loss <= report.initial_loss
        assert report.epochs_run == 200

    def test_memorizes_single_pattern(self, rng):
        pattern = rng.uniform(0.2, 0.8, size=4)
        X = np.tile(pattern, (50, 1))
        # a constant predictor at the data mean already scores 0 here, so the
        # bar is an absolute one
        _, report = ae.train_ae(X, AETopology(4, 4, 4), AETrainConfig(mask_ratio=0.0, epochs=500))
        assert report.final_loss < 0.01

    def test_zero_epochs_returns_init(self, rng):
        X = rng.uniform(size=(10, 3))
        cfg = AETrainConfig(epochs=0, seed=2)
        params, report = ae.train_ae(X, AETopology(3, 2, 2), cfg)
        expected = ae.init_params(AETopology(3, 2, 2), np.random.default_rng(2))
        for name in params.blocks():
            np.testing.assert_array_equal(params.blocks()[name], expected.blocks()[name])
        assert report.final_loss == report.initial_loss

    def test_minibatch(self, rng):
        X = rng.uniform(size=(60, 4))
        _, report = ae.train_ae(X, AETopology(4, 2, 4), AETrainConfig(epochs=50, batch_size=16))
        assert report.final_loss <= report.initial_loss

    def test_deterministic(self, rng):
        X = rng.uniform(size=(40, 4))
        a, _ = ae.train_ae(X, AETopology(4, 2, 4), AETrainConfig(epochs=30, seed=5))
        b, _ = ae.train_ae(X, AETopology(4, 2, 4), AETrainConfig(epochs=30, seed=5))
        for name in a.blocks():
            np.testing.assert_array_equal(a.blocks()[name], b.blocks()[name])

    def test_rejects_out_of_range_inputs(self):
        with pytest.raises(DataError):
            ae.train_ae(np.full((5, 2), 2.0), AETopology(2, 1, 1))
        with pytest.raises(DataError):
            ae.train_ae(np.full((5, 3), 0.5), AETopology(2, 1, 1))

    def test_constant_input(self):
        X = np.full((10, 3), 0.5)
        params, report = ae.train_ae(X, AETopology(3, 1, 2), AETrainConfig(epochs=20))
        assert np.isfinite(report.final_loss)

    def test_shrink_codes_shape(self, rng):
        X = rng.uniform(size=(12, 4))
        p = ae.init_params(AETopology(4, 2, 3), rng)
        assert ae.shrink_codes(p, X).shape == (12, 2)
