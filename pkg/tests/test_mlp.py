"""Classifier: gradients vs finite differences, training behavior, macro-F1."""

import numpy as np
import pytest

from affectkit.errors import (
    DimensionMismatch,
    EmptyInput,
    InsufficientData,
    InvalidSpec,
)
from affectkit.mlp import (
    MlpModel,
    TrainConfig,
    loss_and_gradients,
    macro_f1,
    softmax,
    train,
    _init_params,
)


def _blobs(n_per_class, rng, spread=0.6):
    centers = np.array([[0.0, 0.0], [3.0, 0.5], [1.0, 3.0]])
    xs, ys = [], []
    for c, center in enumerate(centers):
        xs.append(center + spread * rng.standard_normal((n_per_class, 2)))
        ys.append(np.full(n_per_class, c))
    return np.vstack(xs), np.concatenate(ys)


class TestSoftmax:
    def test_rows_are_distributions(self):
        z = np.random.default_rng(0).normal(size=(10, 3)) * 50
        p = softmax(z)
        np.testing.assert_allclose(p.sum(axis=1), 1.0, atol=1e-12)
        assert p.min() >= 0.0

    def test_shift_invariance(self):
        z = np.array([[1.0, 2.0, 3.0]])
        np.testing.assert_allclose(softmax(z), softmax(z + 100.0), atol=1e-12)


class TestGradients:
    def test_analytic_matches_central_differences_6_4_3(self):
        rng = np.random.default_rng(7)
        weights, biases = _init_params([6, 4, 3], rng)
        x = rng.standard_normal((12, 6))
        onehot = np.eye(3)[rng.integers(0, 3, size=12)]
        l2 = 1e-3
        _, gw, gb = loss_and_gradients(weights, biases, x, onehot, l2=l2)

        def loss_at(params_w, params_b):
            return loss_and_gradients(params_w, params_b, x, onehot, l2=l2)[0]

        eps = 1e-6
        worst = 0.0
        for li in range(len(weights)):
            for arr, grad in ((weights, gw), (biases, gb)):
                flat = arr[li].reshape(-1)
                gflat = grad[li].reshape(-1)
                idx = rng.choice(flat.size, size=min(20, flat.size), replace=False)
                for j in idx:
                    orig = flat[j]
                    flat[j] = orig + eps
                    up = loss_at(weights, biases)
                    flat[j] = orig - eps
                    down = loss_at(weights, biases)
                    flat[j] = orig
                    numeric = (up - down) / (2 * eps)
                    denom = max(abs(numeric), abs(gflat[j]), 1e-8)
                    worst = max(worst, abs(numeric - gflat[j]) / denom)
        assert worst <= 1e-4

    def test_gradients_with_dropout_mask_are_consistent(self):
        # with a frozen mask (same rng state), analytic == numeric still holds
        rng = np.random.default_rng(11)
        weights, biases = _init_params([5, 4, 3], rng)
        x = np.random.default_rng(1).standard_normal((8, 5))
        onehot = np.eye(3)[np.random.default_rng(2).integers(0, 3, size=8)]

        def loss_with_fixed_mask(w, b):
            return loss_and_gradients(
                w, b, x, onehot, dropout=0.5, rng=np.random.default_rng(99)
            )[0]

        _, gw, _ = loss_and_gradients(
            weights, biases, x, onehot, dropout=0.5, rng=np.random.default_rng(99)
        )
        eps = 1e-6
        flat = weights[0].reshape(-1)
        g = gw[0].reshape(-1)
        for j in (0, 3, 7):
            orig = flat[j]
            flat[j] = orig + eps
            up = loss_with_fixed_mask(weights, biases)
            flat[j] = orig - eps
            down = loss_with_fixed_mask(weights, biases)
            flat[j] = orig
            numeric = (up - down) / (2 * eps)
            assert abs(numeric - g[j]) / max(abs(numeric), 1e-8) <= 1e-3


class TestTraining:
    def test_blobs_reach_high_validation_accuracy(self):
        rng = np.random.default_rng(0)
        x_train, y_train = _blobs(60, rng)
        x_val, y_val = _blobs(25, rng)
        model = train(x_train, y_train, x_val, y_val, TrainConfig(seed=42))
        acc = float(np.mean(model.predict(x_val) == y_val))
        assert acc >= 0.95
        assert 0.0 <= model.f1 <= 1.0

    def test_same_seed_same_model(self):
        rng = np.random.default_rng(3)
        x_train, y_train = _blobs(30, rng)
        x_val, y_val = _blobs(10, rng)
        cfg = TrainConfig(max_epochs=30, seed=7)
        m1 = train(x_train, y_train, x_val, y_val, cfg)
        m2 = train(x_train, y_train, x_val, y_val, cfg)
        for w1, w2 in zip(m1.weights, m2.weights):
            np.testing.assert_array_equal(w1, w2)
        assert m1.f1 == m2.f1

    def test_different_seed_different_model(self):
        rng = np.random.default_rng(4)
        x_train, y_train = _blobs(30, rng)
        x_val, y_val = _blobs(10, rng)
        m1 = train(x_train, y_train, x_val, y_val, TrainConfig(max_epochs=10, seed=1))
        m2 = train(x_train, y_train, x_val, y_val, TrainConfig(max_epochs=10, seed=2))
        assert any(
            not np.array_equal(w1, w2) for w1, w2 in zip(m1.weights, m2.weights)
        )

    def test_f1_is_validation_macro_f1_of_returned_model(self):
        rng = np.random.default_rng(5)
        x_train, y_train = _blobs(40, rng)
        x_val, y_val = _blobs(15, rng)
        model = train(x_train, y_train, x_val, y_val, TrainConfig(seed=0))
        assert model.f1 == pytest.approx(macro_f1(model.predict(x_val), y_val))

    def test_single_class_training_rejected(self):
        x = np.random.default_rng(6).normal(size=(20, 3))
        with pytest.raises(InsufficientData):
            train(x, np.zeros(20, dtype=int), x, np.zeros(20, dtype=int))

    def test_shape_mismatch_rejected(self):
        rng = np.random.default_rng(8)
        x_train, y_train = _blobs(10, rng)
        with pytest.raises(DimensionMismatch):
            train(x_train, y_train, np.ones((5, 3)), np.zeros(5, dtype=int))

    def test_predict_proba_shapes(self):
        rng = np.random.default_rng(9)
        x_train, y_train = _blobs(20, rng)
        x_val, y_val = _blobs(8, rng)
        model = train(x_train, y_train, x_val, y_val, TrainConfig(max_epochs=5))
        single = model.predict_proba(x_val[0])
        batch = model.predict_proba(x_val)
        assert single.shape == (3,)
        assert batch.shape == (x_val.shape[0], 3)
        np.testing.assert_allclose(batch.sum(axis=1), 1.0, atol=1e-9)
        with pytest.raises(DimensionMismatch):
            model.predict_proba(np.ones(5))

    def test_checkpoint_round_trip(self):
        rng = np.random.default_rng(10)
        x_train, y_train = _blobs(20, rng)
        x_val, y_val = _blobs(8, rng)
        model = train(x_train, y_train, x_val, y_val,
                      TrainConfig(max_epochs=5, seed=3), classes=("a", "b", "c"))
        back = MlpModel.from_dict(model.to_dict())
        np.testing.assert_array_equal(back.predict(x_val), model.predict(x_val))
        assert back.f1 == model.f1
        assert back.config == model.config
        assert back.classes == model.classes


class TestTrainConfig:
    def test_defaults(self):
        cfg = TrainConfig()
        assert cfg.hidden_sizes == (64, 32)
        assert cfg.learning_rate == pytest.approx(1e-3)
        assert cfg.dropout == pytest.approx(0.2)
        assert cfg.batch_size == 32

    def test_validation(self):
        with pytest.raises(InvalidSpec):
            TrainConfig(dropout=1.0)
        with pytest.raises(InvalidSpec):
            TrainConfig(hidden_sizes=(0,))
        with pytest.raises(InvalidSpec):
            TrainConfig(learning_rate=0.0)


class TestMacroF1:
    def test_hand_computed_example(self):
        # class 0: tp=1 fp=0 fn=0 -> F1 1; class 1: tp=1 fp=1 fn=0 -> F1 2/3;
        # class 2: tp=0 fn=1 -> F1 0; macro = (1 + 2/3 + 0)/3
        assert macro_f1([0, 1, 1], [0, 1, 2]) == pytest.approx(5.0 / 9.0)

    def test_perfect_predictions(self):
        assert macro_f1([0, 1, 2, 0], [0, 1, 2, 0]) == 1.0

    def test_absent_class_scores_zero(self):
        # class 2 never appears anywhere: contributes 0 to the mean
        assert macro_f1([0, 1], [0, 1]) == pytest.approx(2.0 / 3.0)

    def test_empty_raises(self):
        with pytest.raises(EmptyInput):
            macro_f1([], [])

    def test_length_mismatch(self):
        with pytest.raises(DimensionMismatch):
            macro_f1([0, 1], [0])
