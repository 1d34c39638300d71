import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.linear_model import LogisticRegression

from peersel.classifier import (
    MlpParams,
    TrainConfig,
    _example_gradients,
    cross_entropy,
    forward,
    forward_batch,
    gradient_check,
    init_mlp,
    load_params_csv,
    predict_all,
    save_params_csv,
    train_epoch,
)
from peersel.data import generate_gaussian_mixture, inject_symmetric_noise
from peersel.numerics import derive_stream

from oracles import finite_diff_gradients


def clone(params: MlpParams) -> MlpParams:
    return MlpParams(
        weights=[w.copy() for w in params.weights],
        biases=[b.copy() for b in params.biases],
        vel_w=[v.copy() for v in params.vel_w],
        vel_b=[v.copy() for v in params.vel_b],
    )


class TestInit:
    def test_distinct_streams_distinct_weights(self):
        a = init_mlp(4, (8,), 3, derive_stream(1, 0))
        b = init_mlp(4, (8,), 3, derive_stream(1, 1))
        assert not np.array_equal(a.weights[0], b.weights[0])

    def test_same_stream_identical(self):
        a = init_mlp(4, (8,), 3, derive_stream(1, 0))
        b = init_mlp(4, (8,), 3, derive_stream(1, 0))
        for wa, wb in zip(a.weights, b.weights):
            np.testing.assert_array_equal(wa, wb)

    def test_he_scaling(self):
        params = init_mlp(64, (64,), 3, derive_stream(2, 0))
        observed = params.weights[0].std()
        expected = math.sqrt(2.0 / 64)
        assert abs(observed - expected) / expected < 0.2

    def test_biases_zero(self):
        params = init_mlp(5, (7,), 2, derive_stream(3, 0))
        for b in params.biases:
            assert not b.any()


class TestForward:
    def test_output_on_simplex(self):
        params = init_mlp(6, (5,), 4, derive_stream(4, 0))
        p = forward(params, np.ones(6))
        assert p.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all(p >= 0)

    def test_zero_network_uniform(self):
        params = init_mlp(3, (4,), 5, derive_stream(4, 0))
        for w in params.weights:
            w[:] = 0.0
        np.testing.assert_allclose(forward(params, np.ones(3)), np.full(5, 0.2), atol=1e-15)

    def test_hand_computed_tiny_net(self):
        # d=2, one hidden unit, C=2; weights set by hand
        params = MlpParams(
            weights=[np.array([[1.0], [-2.0]]), np.array([[0.5, -0.5]])],
            biases=[np.array([0.25]), np.array([0.1, -0.1])],
        )
        x = np.array([1.0, 0.5])
        h = max(0.0, 1.0 * 1.0 + (-2.0) * 0.5 + 0.25)
        logits = [h * 0.5 + 0.1, h * -0.5 - 0.1]
        m = max(logits)
        exps = [math.exp(v - m) for v in logits]
        expected = np.array(exps) / sum(exps)
        np.testing.assert_allclose(forward(params, x), expected, atol=1e-10)

    def test_shape_mismatch(self):
        params = init_mlp(4, (3,), 2, derive_stream(4, 0))
        with pytest.raises(ValueError):
            forward(params, np.ones(5))

    @given(st.integers(min_value=0, max_value=10_000))
    @settings(max_examples=30, deadline=None)
    def test_simplex_property_random_nets(self, seed):
        stream = derive_stream(seed, 77)
        params = init_mlp(3, (4,), 3, stream)
        p = forward(params, stream.standard_normal(3) * 3)
        assert p.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all(p >= 0)


class TestCrossEntropy:
    def test_perfect_prediction(self):
        assert cross_entropy(np.array([0.0, 1.0]), 1) == 0.0

    def test_uniform_four_classes(self):
        assert cross_entropy(np.full(4, 0.25), 2) == pytest.approx(math.log(4), abs=1e-12)

    def test_floor_engaged(self):
        val = cross_entropy(np.array([1.0, 0.0]), 1)
        assert val == pytest.approx(-math.log(1e-12), abs=1e-9)
        assert val <= 27.64


class TestTrainEpoch:
    def test_zero_learning_rate_is_identity(self):
        ds = generate_gaussian_mixture(50, 3, 2, 4.0, seed=5)
        params = init_mlp(3, (4,), 2, derive_stream(5, 0))
        before = clone(params)
        cfg = TrainConfig(hidden_sizes=(4,), learning_rate=0.0, weight_decay=0.0)
        train_epoch(params, ds, np.arange(50), cfg, derive_stream(5, 1))
        for w0, w1 in zip(before.weights, params.weights):
            np.testing.assert_array_equal(w0, w1)

    def test_empty_indices_rejected(self):
        ds = generate_gaussian_mixture(10, 3, 2, 4.0, seed=5)
        params = init_mlp(3, (4,), 2, derive_stream(5, 0))
        with pytest.raises(ValueError, match="empty training subset"):
            train_epoch(params, ds, np.array([], dtype=int), TrainConfig(hidden_sizes=(4,)), derive_stream(5, 1))

    def test_reaches_linear_oracle_on_separable_data(self):
        ds = generate_gaussian_mixture(200, 2, 2, 6.0, seed=6)
        oracle_acc = LogisticRegression().fit(ds.features, ds.clean_labels).score(
            ds.features, ds.clean_labels
        )
        assert oracle_acc >= 0.99
        params = init_mlp(2, (16,), 2, derive_stream(6, 0))
        cfg = TrainConfig(hidden_sizes=(16,))
        for epoch in range(50):
            train_epoch(params, ds, np.arange(200), cfg, derive_stream(6, 100 + epoch))
        pred = np.argmax(forward_batch(params, ds.features), axis=1)
        assert (pred == ds.clean_labels).mean() >= 0.99

    def test_loss_decreases_on_clean_data(self):
        ds = generate_gaussian_mixture(300, 4, 3, 4.0, seed=7)
        params = init_mlp(4, (16,), 3, derive_stream(7, 0))
        cfg = TrainConfig(hidden_sizes=(16,))
        losses = []
        for epoch in range(5):
            _, loss = train_epoch(params, ds, np.arange(300), cfg, derive_stream(7, 200 + epoch))
            losses.append(loss)
        assert losses[-1] < losses[0]

    def test_deterministic_given_seed(self):
        ds = generate_gaussian_mixture(80, 3, 2, 4.0, seed=8)
        cfg = TrainConfig(hidden_sizes=(8,))
        results = []
        for _ in range(2):
            params = init_mlp(3, (8,), 2, derive_stream(8, 0))
            for epoch in range(3):
                train_epoch(params, ds, np.arange(80), cfg, derive_stream(8, 300 + epoch))
            results.append(params)
        for w0, w1 in zip(results[0].weights, results[1].weights):
            np.testing.assert_array_equal(w0, w1)


class TestPredictAll:
    def test_rows_on_simplex(self):
        ds = generate_gaussian_mixture(40, 3, 3, 4.0, seed=9)
        params = init_mlp(3, (6,), 3, derive_stream(9, 0))
        probs = predict_all(params, ds, np.arange(40))
        np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-12)

    def test_identical_on_rerun(self):
        ds = generate_gaussian_mixture(40, 3, 3, 4.0, seed=9)
        params = init_mlp(3, (6,), 3, derive_stream(9, 0))
        np.testing.assert_array_equal(
            predict_all(params, ds, np.arange(40)), predict_all(params, ds, np.arange(40))
        )

    def test_zero_net_uniform_rows(self):
        ds = generate_gaussian_mixture(10, 3, 4, 4.0, seed=9)
        params = init_mlp(3, (6,), 4, derive_stream(9, 0))
        for w in params.weights:
            w[:] = 0.0
        np.testing.assert_allclose(predict_all(params, ds, np.arange(10)), 0.25, atol=1e-15)


class TestGradients:
    def test_random_tiny_nets_match_finite_differences(self):
        for i in range(10):
            stream = derive_stream(100 + i, 0)
            params = init_mlp(3, (4,), 3, stream)
            x = stream.standard_normal(3)
            assert gradient_check(params, x, int(stream.integers(0, 3))) < 1e-4

    def test_independent_oracle_agrees(self):
        stream = derive_stream(55, 0)
        params = init_mlp(3, (4,), 3, stream)
        x = stream.standard_normal(3)
        analytic_w, analytic_b = _example_gradients(params, x, 1)
        fd_w, fd_b = finite_diff_gradients(params.weights, params.biases, x, 1)
        for a, f in zip(analytic_w + analytic_b, fd_w + fd_b):
            np.testing.assert_allclose(a, f, atol=1e-6, rtol=1e-4)

    def test_stationary_at_perfect_prediction(self):
        # saturate the correct logit so probs[label] == 1 numerically
        params = MlpParams(
            weights=[np.array([[1.0], [0.0]]), np.array([[60.0, -60.0]])],
            biases=[np.array([1.0]), np.array([0.0, 0.0])],
        )
        assert gradient_check(params, np.array([1.0, 0.0]), 0) < 1e-6

    def test_detects_perturbed_analytic_gradient(self):
        stream = derive_stream(56, 0)
        params = init_mlp(3, (4,), 3, stream)
        x = stream.standard_normal(3)
        analytic_w, _ = _example_gradients(params, x, 0)
        fd_w, _ = finite_diff_gradients(params.weights, params.biases, x, 0)
        wrong = analytic_w[0] * 1.01
        denom = np.maximum(np.maximum(np.abs(wrong), np.abs(fd_w[0])), 1e-300)
        rel = np.where(denom > 1e-6, np.abs(wrong - fd_w[0]) / denom, 0.0)
        assert rel.max() > 1e-4

    def test_oversized_network_rejected(self):
        params = init_mlp(64, (64,), 10, derive_stream(57, 0))
        with pytest.raises(ValueError, match="tiny networks"):
            gradient_check(params, np.zeros(64), 0)


class TestCheckpoint:
    def test_round_trip(self, tmp_path):
        ds = generate_gaussian_mixture(30, 3, 2, 4.0, seed=11)
        params = init_mlp(3, (5,), 2, derive_stream(11, 0))
        train_epoch(params, ds, np.arange(30), TrainConfig(hidden_sizes=(5,)), derive_stream(11, 1))
        path = str(tmp_path / "ckpt.csv")
        save_params_csv(params, path)
        back = load_params_csv(path)
        for a, b in zip(params.weights + params.biases, back.weights + back.biases):
            np.testing.assert_array_equal(a, b)
        for a, b in zip(params.vel_w + params.vel_b, back.vel_w + back.vel_b):
            np.testing.assert_array_equal(a, b)
