"""Unit tests for MetaBlock / MetaQuantNet weight generation."""

import numpy as np
import pytest

from metaquant.errors import ConfigError, PolicyError, SpecError
from metaquant.hypernet import MetaQuantNet, block_forward, generate_weights, predict_logits
from metaquant.numerics import (
    ComputationTape,
    Tensor,
    gradient_agreement,
    mul,
    numerical_gradient,
    softmax_cross_entropy,
    tensor_sum,
    use_precision,
)
from metaquant.target_net import LayerKind, LayerSpec, TargetNetSpec


def test_gamma_starts_at_one(mlp_net):
    """Test that every block emits gamma = 1 before training."""
    for block in mlp_net.blocks:
        assert block.forward_parts(4).gamma.item() == 1.0


def test_block_forward_is_pure(mlp_net):
    """Test that generating the same block twice gives identical weights."""
    first = block_forward(mlp_net, mlp_net.blocks[0], 3).data.copy()
    np.testing.assert_array_equal(block_forward(mlp_net, mlp_net.blocks[0], 3).data, first)


def test_generated_shapes_and_level_counts(mlp_net, mlp_spec):
    """Test per-block shapes and the 2**q distinct-value bound for policy (2, 4, 8)."""
    weights = generate_weights(mlp_net, (2, 4, 8))
    for weight, layer, q in zip(weights, mlp_spec.layers, (2, 4, 8), strict=True):
        assert weight.shape == layer.weight_shape
        assert len(np.unique(weight.data)) <= 2**q


@pytest.mark.parametrize("q", [1, 2, 3])
def test_level_bound_with_trained_gamma(mlp_net, q):
    """Test the 2**q distinct-value bound when gamma is not 1."""
    for block in mlp_net.blocks:
        block.fc_g.bias.data[...] = -0.37
    for weight in generate_weights(mlp_net, (q, q, q)):
        assert len(np.unique(weight.data)) <= 2**q


def test_eight_bit_output_tracks_float_head(mlp_net):
    """Test that with gamma = 1 the 8-bit output stays within alpha/510 of the float head."""
    parts = mlp_net.blocks[1].forward_parts(8)
    w_float = parts.w_float.data
    alpha = float(w_float.max() - w_float.min())
    diff = np.abs(parts.weight.data.reshape(-1) - w_float.reshape(-1))
    assert diff.max() <= alpha / 510 + 1e-6


def test_block_independence(mlp_net):
    """Test that changing one layer's bitwidth leaves the other tensors bitwise unchanged."""
    before = [w.data.copy() for w in generate_weights(mlp_net, (3, 3, 3))]
    after = generate_weights(mlp_net, (3, 6, 3))
    np.testing.assert_array_equal(after[0].data, before[0])
    np.testing.assert_array_equal(after[2].data, before[2])
    assert not np.array_equal(after[1].data, before[1])


def test_policy_length_mismatch(mlp_net):
    """Test that a policy of the wrong length is rejected."""
    with pytest.raises(PolicyError, match="length 2"):
        generate_weights(mlp_net, (4, 4))


def test_bitwidth_outside_active_range(mlp_spec):
    """Test that bitwidths outside the trained range are refused."""
    net = MetaQuantNet(mlp_spec, hidden=4, bit_range=(1, 3))
    with pytest.raises(ConfigError, match="active range"):
        generate_weights(net, (2, 5, 2))


def test_non_quantizable_layers_are_rejected():
    """Test that a spec with a frozen layer cannot get a hypernetwork."""
    spec = TargetNetSpec(
        name="frozen-head",
        input_shape=(4,),
        class_count=2,
        layers=(LayerSpec(0, LayerKind.DENSE, (4, 2), quantizable=False),),
    )
    with pytest.raises(SpecError, match="layer 0"):
        MetaQuantNet(spec)


def test_straight_through_contract(mlp_spec):
    """Test that quantized-path gradients equal float-path gradients masked by |W_float| < clip."""
    upstream = np.random.default_rng(5).standard_normal(mlp_spec.layers[0].weight_shape)
    reference = MetaQuantNet(mlp_spec, hidden=8, seed=3).blocks[0].forward_parts(3, quantize=False)
    clip = float(np.median(np.abs(reference.w_float.data)))
    grads = {}
    for quantize in (False, True):
        net = MetaQuantNet(mlp_spec, hidden=8, ste_clip=clip, seed=3)
        with ComputationTape() as tape:
            parts = net.blocks[0].forward_parts(3, net.ste_clip, quantize)
            loss = tensor_sum(mul(parts.weight, Tensor(upstream)))
        tape.backward(loss)
        grads[quantize] = (parts.w_float.data.copy(), parts.w_float.grad.copy())
    w_float, float_grad = grads[False]
    mask = np.abs(w_float) < clip
    assert 0 < mask.sum() < mask.size
    np.testing.assert_array_equal(grads[True][1], np.where(mask, float_grad, 0.0))


def test_gamma_gradients_do_not_depend_on_the_mask(mlp_spec, blobs):
    """Test that fc_g gradients are identical whatever the straight-through band."""
    split = blobs.split("train").head(16)
    grads = []
    for clip in (0.01, 1e9):
        net = MetaQuantNet(mlp_spec, hidden=8, ste_clip=clip, seed=2)
        with ComputationTape() as tape:
            loss = softmax_cross_entropy(predict_logits(net, (2, 3, 4), Tensor(split.features)), split.labels)
        tape.backward(loss)
        grads.append([net.blocks[i].fc_g.weight.grad.copy() for i in range(3)])
    for a, b in zip(*grads, strict=True):
        np.testing.assert_array_equal(a, b)


def test_gamma_bias_gradient_matches_finite_differences(tiny_spec):
    """Test the smooth gamma path of a quantized net against central differences."""
    rng = np.random.default_rng(0)
    with use_precision(np.float64):
        net = MetaQuantNet(tiny_spec, hidden=6, seed=1)
        x, labels = Tensor(rng.standard_normal((8, 4))), rng.integers(0, 2, 8)

        def loss_fn() -> float:
            return softmax_cross_entropy(predict_logits(net, (2, 3), x), labels).item()

        with ComputationTape() as tape:
            loss = softmax_cross_entropy(predict_logits(net, (2, 3), x), labels)
        tape.backward(loss)
        for block in net.blocks:
            numeric = numerical_gradient(loss_fn, block.fc_g.bias)
            np.testing.assert_allclose(block.fc_g.bias.grad, numeric, rtol=1e-3, atol=1e-8)


def test_float_pipeline_matches_finite_differences(tiny_spec):
    """Test every hypernetwork parameter of the unquantized pipeline against central differences."""
    rng = np.random.default_rng(1)
    with use_precision(np.float64):
        net = MetaQuantNet(tiny_spec, hidden=5, seed=4, quantize=False)
        x, labels = Tensor(rng.standard_normal((8, 4))), rng.integers(0, 2, 8)

        def loss_fn() -> float:
            return softmax_cross_entropy(predict_logits(net, (4, 6), x), labels).item()

        with ComputationTape() as tape:
            loss = softmax_cross_entropy(predict_logits(net, (4, 6), x), labels)
        tape.backward(loss)
        analytic, numeric = [], []
        for tensor in net.parameters().values():
            analytic.append(np.zeros(tensor.size) if tensor.grad is None else tensor.grad.reshape(-1))
            numeric.append(numerical_gradient(loss_fn, tensor).reshape(-1))
        assert gradient_agreement(np.concatenate(analytic), np.concatenate(numeric)) >= 0.95


def test_load_parameters_checks_names(mlp_net):
    """Test that loading with a missing parameter name raises SpecError."""
    arrays = {name: t.data.copy() for name, t in mlp_net.parameters().items()}
    arrays.pop("blocks.0.fc1.weight")
    with pytest.raises(SpecError, match="missing"):
        mlp_net.load_parameters(arrays)


def test_repeated_forward_passes_are_bit_identical(mlp_net, blobs):
    """Test that two inference passes over the same batch give bitwise equal logits."""
    features = Tensor(blobs.split("val").features)
    first = predict_logits(mlp_net, (2, 5, 8), features).data.copy()
    np.testing.assert_array_equal(predict_logits(mlp_net, (2, 5, 8), features).data, first)


def test_float_weights_are_scaled_to_fan_in(mlp_spec):
    """Test that the float head output is the raw fc_w output divided by sqrt(fan-in)."""
    net = MetaQuantNet(mlp_spec, hidden=8, seed=0, quantize=False)
    block = net.blocks[0]
    h1 = np.maximum(np.array([[4 / 8]]) @ block.fc1.weight.data + block.fc1.bias.data, 0.0)
    h2 = np.maximum(h1 @ block.fc2.weight.data + block.fc2.bias.data, 0.0)
    raw = h2 @ block.fc_w.weight.data + block.fc_w.bias.data
    parts = block.forward_parts(4, quantize=False)
    np.testing.assert_allclose(parts.w_float.data, raw / np.sqrt(mlp_spec.layers[0].fan_in), rtol=1e-5, atol=1e-7)
