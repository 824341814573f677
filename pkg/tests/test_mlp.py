from __future__ import annotations

import numpy as np
import pytest

from app.exceptions import ConfigurationError, DimensionError
from app.nn import mlp


def test_init_shapes_and_bounds():
    model = mlp.init([8, 16, 6], 3, seed=0)
    assert [p.shape for p in model.parameters()] == [(8, 16), (16,), (16, 6), (6,), (3, 6), (3,)]
    for weight, fan_in in ((model.parameters()[0], 8), (model.parameters()[2], 16), (model.fc_weight, 6)):
        assert np.abs(weight).max() <= 1.0 / np.sqrt(fan_in)
    for bias in model.parameters()[1::2]:
        assert not bias.any()


def test_init_is_deterministic():
    a, b = mlp.init([4, 7, 5], 2, seed=9), mlp.init([4, 7, 5], 2, seed=9)
    assert all(np.array_equal(x, y) for x, y in zip(a.parameters(), b.parameters()))
    c = mlp.init([4, 7, 5], 2, seed=10)
    assert not np.array_equal(a.fc_weight, c.fc_weight)


def test_feature_width_must_exceed_classes():
    with pytest.raises(ConfigurationError):
        mlp.init([8, 3], 3, seed=0)


def test_forward_matches_manual_computation(small_model):
    x = np.random.default_rng(2).normal(size=(5, 8))
    out = small_model.forward(x)
    w1, b1, w2, b2, w, b = small_model.parameters()
    h = np.maximum(np.maximum(x @ w1 + b1, 0.0) @ w2 + b2, 0.0)
    assert out.features.shape == (5, 6)
    assert out.logits.shape == (5, 3)
    assert np.allclose(out.features.data, h, atol=1e-12)
    assert np.allclose(out.logits.data, h @ w.T + b, atol=1e-12)


def test_forward_rejects_wrong_width(small_model):
    with pytest.raises(DimensionError):
        small_model.forward(np.zeros((2, 5)))


def test_parameters_are_read_only(small_model):
    with pytest.raises(ValueError):
        small_model.fc_weight[0, 0] = 1.0


def test_with_parameters_checks_shapes(small_model):
    params = small_model.parameters()
    with pytest.raises(DimensionError):
        small_model.with_parameters(params[:-1])
    with pytest.raises(DimensionError):
        small_model.with_parameters(params[:-1] + [np.zeros(4)])


def test_normalized_class_weights(small_model):
    weights, degenerate = mlp.normalized_class_weights(small_model)
    assert not degenerate.any()
    assert np.linalg.norm(weights, axis=1) == pytest.approx(np.ones(3))


def test_forward_commutes_with_row_permutation(small_model):
    x = np.random.default_rng(4).normal(size=(7, 8))
    order = np.random.default_rng(5).permutation(7)
    out = small_model.forward(x)
    shuffled = small_model.forward(x[order])
    assert np.allclose(shuffled.logits.data, out.logits.data[order], rtol=0, atol=1e-12)
    assert np.allclose(shuffled.features.data, out.features.data[order], rtol=0, atol=1e-12)
