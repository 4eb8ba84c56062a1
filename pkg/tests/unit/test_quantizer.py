"""Unit tests for the uniform quantizer and its straight-through gradient."""

import numpy as np
import pytest

from metaquant.errors import ConfigError, DimensionError, InputError
from metaquant.numerics import ComputationTape, Tensor, mul, parameter, tensor_sum
from metaquant.quantizer import (
    QuantizerConfig,
    quantize_unit,
    quantize_weights,
    scale_minmax,
    ste_backward,
)


@pytest.mark.parametrize("q", range(1, 9))
def test_unit_endpoints_are_fixed(q):
    """Test that 0 and 1 map to themselves at every bitwidth."""
    out = quantize_unit(Tensor([0.0, 1.0]), q)
    np.testing.assert_array_equal(out.data, [0.0, 1.0])


def test_unit_rounding_examples():
    """Test hand-evaluated roundings, including the half-away tie at 8 bits."""
    assert quantize_unit(Tensor([0.3]), 2).item() == pytest.approx(1 / 3)
    assert quantize_unit(Tensor([0.3]), 8).item() == pytest.approx(77 / 255)


def test_unit_clamps_out_of_range_values():
    """Test that inputs outside [0, 1] clamp to the end levels."""
    np.testing.assert_array_equal(quantize_unit(Tensor([-0.2, 1.3]), 3).data, [0.0, 1.0])


@pytest.mark.parametrize("q", [0, 9])
def test_bitwidth_out_of_range(q):
    """Test that bitwidths outside 1..8 are rejected."""
    with pytest.raises(ConfigError, match="bitwidth"):
        quantize_unit(Tensor([0.5]), q)


def test_config_rejects_non_positive_clip():
    """Test clip validation and the 2**q - 1 level count."""
    with pytest.raises(ConfigError, match="ste_clip"):
        QuantizerConfig(bitwidth=4, ste_clip=0.0)
    assert QuantizerConfig(bitwidth=3).levels == 7


def test_scale_minmax_examples():
    """Test alpha, beta and the scaled values on small examples."""
    scaled, params = scale_minmax(Tensor([-1.0, 0.0, 3.0]))
    assert (params.alpha, params.beta) == (4.0, -1.0)
    np.testing.assert_allclose(scaled.data, [0.0, 0.25, 1.0])
    scaled, params = scale_minmax(Tensor([0.0, 1.0]))
    np.testing.assert_array_equal(scaled.data, [0.0, 1.0])


def test_scale_minmax_constant_tensor():
    """Test that a constant tensor scales to zeros and quantizes to itself."""
    scaled, params = scale_minmax(Tensor([2.5, 2.5]))
    assert params.alpha == 0
    np.testing.assert_array_equal(scaled.data, [0.0, 0.0])
    np.testing.assert_array_equal(quantize_weights(Tensor([2.5, 2.5]), 1).data, [2.5, 2.5])


def test_scale_minmax_empty():
    """Test that an empty tensor cannot be scaled."""
    with pytest.raises(InputError, match="empty"):
        scale_minmax(Tensor(np.zeros(0)))


def test_quantize_weights_one_bit_example():
    """Test that one bit snaps every weight to the minimum or the maximum."""
    np.testing.assert_array_equal(quantize_weights(Tensor([-1.0, 0.0, 3.0]), 1).data, [-1.0, -1.0, 3.0])


def test_two_valued_tensor_is_exact_at_eight_bits():
    """Test that a tensor with two distinct values survives quantization unchanged."""
    w = Tensor([-0.7, 1.9, -0.7, 1.9])
    np.testing.assert_array_equal(quantize_weights(w, 8).data, w.data)


def test_quantizer_invariants_on_random_tensors():
    """Test level count, fixed endpoints, idempotence, error bound and monotonicity."""
    rng = np.random.default_rng(0)
    for trial in range(400):
        q = int(rng.integers(1, 9))
        w = Tensor(rng.standard_normal(int(rng.integers(2, 60))) * rng.uniform(0.1, 5.0))
        w_hat = quantize_weights(w, q).data
        alpha = float(w.data.max() - w.data.min())
        assert len(np.unique(w_hat)) <= 2**q
        assert w_hat.max() == w.data.max() and w_hat.min() == w.data.min()
        np.testing.assert_array_equal(quantize_weights(Tensor(w_hat), q).data, w_hat)
        bound = alpha / (2 * (2**q - 1))
        assert np.max(np.abs(w_hat - w.data)) <= bound * (1 + 1e-5) + 1e-6, trial
        order = np.argsort(w.data, kind="stable")
        assert np.all(np.diff(w_hat[order]) >= 0)


def test_ste_backward_examples():
    """Test that the gradient passes where |W| < clip and is zero elsewhere."""
    np.testing.assert_array_equal(ste_backward(np.array([3.0]), np.array([0.5]), 1.0), [3.0])
    np.testing.assert_array_equal(ste_backward(np.array([3.0]), np.array([2.0]), 1.0), [0.0])
    rng = np.random.default_rng(1)
    w, g = rng.standard_normal(50) * 2, rng.standard_normal(50)
    np.testing.assert_array_equal(ste_backward(g, w, 1.0), (np.abs(w) < 1.0) * g)


def test_ste_backward_shape_mismatch():
    """Test that mismatched gradient and weight shapes are rejected."""
    with pytest.raises(DimensionError):
        ste_backward(np.ones(3), np.ones(4), 1.0)


def test_quantize_weights_records_straight_through_rule():
    """Test that the recorded gradient is the upstream gradient masked by |W| < clip."""
    w = parameter(np.array([0.2, -0.5, 1.5, -2.0, 0.9]), name="w")
    upstream = Tensor([1.0, 2.0, 3.0, 4.0, 5.0])
    with ComputationTape() as tape:
        loss = tensor_sum(mul(quantize_weights(w, 2, ste_clip=1.0), upstream))
    tape.backward(loss)
    np.testing.assert_array_equal(w.grad, [1.0, 2.0, 0.0, 0.0, 5.0])
