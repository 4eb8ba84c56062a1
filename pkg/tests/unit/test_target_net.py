"""Unit tests for target network specs and the weight-injected forward pass."""

import math

import numpy as np
import pytest

from metaquant.errors import SpecError, UnknownSpecError
from metaquant.numerics import Tensor, softmax_cross_entropy, use_precision
from metaquant.target_net import (
    Activation,
    LayerKind,
    LayerSpec,
    TargetNetSpec,
    builtin_specs,
    forward_with_weights,
    get_spec,
)


def test_catalog_layer_counts():
    """Test that the catalog exposes mlp-3 and cnn-5 with their layer counts."""
    catalog = builtin_specs(class_count=4)
    assert catalog["mlp-3"].layer_count == 3
    assert catalog["cnn-5"].layer_count == 5
    assert catalog["mlp-3"].weight_counts == (64 * 32, 32 * 16, 16 * 4)


def test_unknown_spec_is_a_lookup_error():
    """Test that an unknown name raises UnknownSpecError, a LookupError."""
    with pytest.raises(LookupError, match="vgg99"):
        get_spec("vgg99")
    with pytest.raises(UnknownSpecError):
        get_spec("vgg99")


def test_identity_network_returns_its_input():
    """Test that a single linear layer with identity weights returns its input."""
    spec = TargetNetSpec(
        name="identity",
        input_shape=(3,),
        class_count=3,
        layers=(LayerSpec(0, LayerKind.DENSE, (3, 3), activation=Activation.NONE),),
    )
    x = np.array([[0.5, -1.0, 2.0], [3.0, 0.0, 1.0]])
    logits = forward_with_weights(spec, [Tensor(np.eye(3))], Tensor(x))
    np.testing.assert_array_equal(logits.data, x.astype(np.float32))


def test_zero_weights_give_uniform_cross_entropy(mlp_spec):
    """Test that all-zero weights give a loss of log K."""
    weights = [Tensor(np.zeros(layer.weight_shape)) for layer in mlp_spec.layers]
    logits = forward_with_weights(mlp_spec, weights, Tensor(np.ones((5, 1, 8, 8))))
    loss = softmax_cross_entropy(logits, [0, 1, 2, 3, 0])
    assert loss.item() == pytest.approx(math.log(4), rel=1e-6)


def test_two_layer_mlp_matches_manual_composition(tiny_spec):
    """Test the forward pass against a hand-composed matmul/relu chain."""
    rng = np.random.default_rng(0)
    with use_precision(np.float64):
        w0, w1 = rng.standard_normal((4, 3)), rng.standard_normal((3, 2))
        b0, b1 = rng.standard_normal(3), rng.standard_normal(2)
        x = rng.standard_normal((6, 4))
        logits = forward_with_weights(
            tiny_spec, [Tensor(w0), Tensor(w1)], Tensor(x), [Tensor(b0), Tensor(b1)]
        )
    expected = np.maximum(np.maximum(x @ w0 + b0, 0) @ w1 + b1, 0)
    np.testing.assert_allclose(logits.data, expected, atol=1e-6)


def test_cnn_forward_shape(cnn_spec):
    """Test that cnn-5 maps 8x8 images to one logit per class."""
    weights = [Tensor(np.full(layer.weight_shape, 0.1)) for layer in cnn_spec.layers]
    logits = forward_with_weights(cnn_spec, weights, Tensor(np.ones((2, 1, 8, 8))))
    assert logits.shape == (2, 3)


def test_weight_shape_mismatch_names_the_layer(mlp_spec):
    """Test that a wrongly shaped weight is reported with its layer index."""
    weights = [Tensor(np.zeros(layer.weight_shape)) for layer in mlp_spec.layers]
    weights[1] = Tensor(np.zeros((16, 32)))
    with pytest.raises(SpecError, match="layer 1"):
        forward_with_weights(mlp_spec, weights, Tensor(np.ones((1, 64))))


def test_wrong_weight_count(mlp_spec):
    """Test that supplying too few weight tensors is rejected."""
    with pytest.raises(SpecError, match="2 weight tensors"):
        forward_with_weights(mlp_spec, [Tensor(np.zeros((64, 32)))] * 2, Tensor(np.ones((1, 64))))


def test_spec_rejects_shapes_that_do_not_compose():
    """Test that a spec whose layer shapes do not chain is rejected at construction."""
    with pytest.raises(SpecError, match="layer 1"):
        TargetNetSpec(
            name="broken",
            input_shape=(4,),
            class_count=2,
            layers=(LayerSpec(0, LayerKind.DENSE, (4, 3)), LayerSpec(1, LayerKind.DENSE, (5, 2))),
        )


def test_fan_in_of_dense_and_conv_layers(cnn_spec):
    """Test fan-in as rows of a dense weight and C*kh*kw of a conv kernel."""
    assert LayerSpec(0, LayerKind.DENSE, (64, 32)).fan_in == 64
    assert LayerSpec(0, LayerKind.CONV2D, (8, 4, 3, 3)).fan_in == 36
    assert [layer.fan_in for layer in cnn_spec.layers][:3] == [9, 36, 72]
