"""Tests for logistic regression and the two-layer MLP."""

import math

import numpy as np
import pytest

from crosswic import classifiers as cl
from crosswic import numgrad as ng
from crosswic.errors import ConfigError, DegenerateDataError, DimensionError


def margin_separable(n, dim, margin, seed):
    rng = np.random.default_rng(seed)
    w = rng.normal(size=dim)
    w /= np.linalg.norm(w)
    feats, labels = [], []
    while len(feats) < n:
        x = rng.normal(size=dim)
        z = x @ w
        if abs(z) < margin:
            continue
        feats.append(x)
        labels.append("T" if z > 0 else "F")
    return feats, labels


def xor_corners(n, seed):
    rng = np.random.default_rng(seed)
    feats, labels = [], []
    for _ in range(n):
        a, b = rng.integers(0, 2), rng.integers(0, 2)
        feats.append(np.array([2.0 * a - 1.0, 2.0 * b - 1.0]))
        labels.append("T" if a != b else "F")
    return feats, labels


class TestRegimes:
    def test_lr_defaults(self):
        regime = cl.lr_regime()
        assert (regime.max_iters, regime.batch_size, regime.learning_rate) == (150, 32, 0.0025)
        assert regime.optimizer.kind == "sgd"

    def test_mlp_defaults(self):
        regime = cl.mlp_regime()
        assert (regime.max_iters, regime.learning_rate) == (200, 0.001)
        assert regime.optimizer.kind == "adam"
        assert (regime.optimizer.beta1, regime.optimizer.beta2) == (0.9, 0.999)

    def test_validation(self):
        with pytest.raises(ConfigError):
            cl.TrainRegime(0, 32, 0.1, ng.OptimizerConfig("sgd", 0.1))


class TestMLPForward:
    def test_all_zero_weights_give_half_half(self):
        model = cl.MLPModel(4)
        for p in model.parameters():
            p.data[...] = 0.0
        probs = cl.mlp_forward(model, ng.tensor([1.0, -2.0, 3.0, 0.5]))
        np.testing.assert_allclose(probs.data, [0.5, 0.5], atol=1e-15)

    def test_hand_computed_softmax(self):
        # identity first layer, zero second layer with bias (0, 1)
        model = cl.MLPModel(3)
        model.w1.data[...] = np.eye(3)
        model.b1.data[...] = 0.0
        model.w2.data[...] = 0.0
        model.b2.data[...] = [0.0, 1.0]
        probs = cl.mlp_forward(model, ng.tensor([0.2, 0.0, 1.5]))
        expected = [1.0 / (1.0 + math.e), math.e / (1.0 + math.e)]
        np.testing.assert_allclose(probs.data, expected, atol=1e-12)

    @pytest.mark.parametrize("dim", [1536, 4608])
    def test_output_shape_at_production_dims(self, dim):
        model = cl.MLPModel(dim)
        for p in model.parameters():
            p.data[...] = 0.0
        probs = cl.mlp_forward(model, ng.Tensor(np.zeros(dim)))
        assert probs.shape == (2,)
        assert probs.data.sum() == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("seed", range(10))
    def test_probabilities_sum_to_one(self, seed):
        rng = np.random.default_rng(seed)
        model = cl.MLPModel(6, seed=seed)
        probs = cl.mlp_forward(model, ng.tensor(rng.normal(size=6) * 5))
        assert abs(probs.data.sum() - 1.0) <= 1e-12

    def test_dimension_checked(self):
        model = cl.MLPModel(4)
        with pytest.raises(DimensionError):
            cl.mlp_forward(model, ng.tensor([1.0, 2.0]))


class TestTrainLR:
    def test_two_point_separable(self):
        feats = [np.array([-1.0]), np.array([1.0])]
        labels = ["F", "T"]
        model = cl.train_lr(feats, labels)
        assert cl.training_accuracy(model, feats, labels) == 1.0

    def test_margin_separable_perfect(self):
        feats, labels = margin_separable(200, 4, 0.5, seed=2024)
        model = cl.train_lr(feats, labels, cl.lr_regime(seed=1))
        assert cl.training_accuracy(model, feats, labels) == 1.0

    def test_zero_init_predicts_half(self):
        model = cl.LRModel(3)
        probs = model.probabilities([np.array([1.0, 2.0, 3.0]),
                                     np.array([-4.0, 0.0, 1.0])])
        np.testing.assert_array_equal(probs, [0.5, 0.5])
        assert model.predict([np.zeros(3)]) == ["F"]  # tie resolves to F

    def test_same_seed_identical_weights(self):
        feats, labels = margin_separable(64, 3, 0.3, seed=7)
        a = cl.train_lr(feats, labels, cl.lr_regime(seed=5))
        b = cl.train_lr(feats, labels, cl.lr_regime(seed=5))
        np.testing.assert_array_equal(a.w.data, b.w.data)
        np.testing.assert_array_equal(a.b.data, b.b.data)

    def test_single_class_rejected(self):
        with pytest.raises(DegenerateDataError):
            cl.train_lr([np.zeros(2), np.ones(2)], ["T", "T"])

    def test_scaling_invariance_of_decision(self):
        feats, labels = margin_separable(50, 3, 0.3, seed=9)
        model = cl.train_lr(feats, labels, cl.lr_regime(seed=0))
        before = model.predict(feats)
        model.w.data *= 7.5
        model.b.data *= 7.5
        assert model.predict(feats) == before

    def test_loss_trend_non_increasing(self):
        feats, labels = margin_separable(100, 4, 0.4, seed=31)
        log = cl.TrainLog()
        cl.train_lr(feats, labels, cl.lr_regime(seed=2), log=log)
        losses = np.array(log.epoch_losses)
        window = 10
        averages = [losses[i:i + window].mean() for i in range(0, len(losses) - window, window)]
        assert all(a >= b - 1e-9 for a, b in zip(averages, averages[1:]))


class TestTrainMLP:
    def test_overfits_random_32(self):
        rng = np.random.default_rng(1001)
        feats = [rng.normal(size=16) for _ in range(32)]
        labels = ["T" if rng.random() < 0.5 else "F" for _ in range(32)]
        if len(set(labels)) < 2:
            labels[0], labels[1] = "T", "F"
        model = cl.train_mlp(feats, labels, cl.mlp_regime(seed=1))
        assert cl.training_accuracy(model, feats, labels) >= 31 / 32

    def test_xor_pattern_perfect(self):
        feats, labels = xor_corners(256, seed=104)
        model = cl.train_mlp(feats, labels, cl.mlp_regime(seed=4), hidden_dim=8)
        assert cl.training_accuracy(model, feats, labels) == 1.0

    def test_xor_unreachable_for_lr(self):
        feats, labels = xor_corners(256, seed=104)
        model = cl.train_lr(feats, labels, cl.lr_regime(seed=4))
        # brute-force check: no linear rule fits XOR
        assert cl.training_accuracy(model, feats, labels) < 0.8

    def test_gradient_of_full_loss(self):
        rng = np.random.default_rng(12)
        model = cl.MLPModel(5, seed=3)
        mat = rng.normal(size=(6, 5))
        golds = [0, 1, 0, 1, 1, 0]

        def loss():
            return ng.cross_entropy_batch(model.logits(ng.Tensor(mat)), golds)

        assert ng.grad_check(loss, model.parameters(), eps=1e-5) < 1e-4

    def test_same_seed_identical_models(self):
        feats, labels = xor_corners(64, seed=11)
        a = cl.train_mlp(feats, labels, cl.mlp_regime(seed=8))
        b = cl.train_mlp(feats, labels, cl.mlp_regime(seed=8))
        for pa, pb in zip(a.parameters(), b.parameters()):
            np.testing.assert_array_equal(pa.data, pb.data)

    def test_single_class_rejected(self):
        with pytest.raises(DegenerateDataError):
            cl.train_mlp([np.zeros(2), np.ones(2)], ["F", "F"])

    def test_checkpoint_roundtrip(self, tmp_path):
        from crosswic.checkpoint import (
            load_checkpoint,
            restore_parameters,
            save_checkpoint,
        )
        feats, labels = xor_corners(64, seed=2)
        model = cl.train_mlp(feats, labels, cl.mlp_regime(seed=1), hidden_dim=8)
        path = tmp_path / "mlp.ckpt"
        save_checkpoint(str(path), model.parameters())
        restored = cl.MLPModel(2, hidden_dim=8, seed=99)
        restore_parameters(restored.parameters(), load_checkpoint(str(path)))
        assert restored.predict(feats) == model.predict(feats)
        for a, b in zip(model.parameters(), restored.parameters()):
            np.testing.assert_array_equal(a.data, b.data)

    def test_steps_iteration_unit(self):
        feats, labels = xor_corners(64, seed=3)
        regime = cl.TrainRegime(
            max_iters=5, batch_size=32, learning_rate=0.001,
            optimizer=ng.OptimizerConfig("adam", 0.001), seed=0,
            iteration_unit="steps",
        )
        log = cl.TrainLog()
        cl.train_mlp(feats, labels, regime, log=log)
        # 64 examples / batch 32 = 2 steps per epoch; 5 steps = 3 partial epochs
        assert len(log.epoch_losses) <= 3
