"""The MetaQuantNet hypernetwork.

One ``MetaBlock`` per quantizable target layer maps the scalar code ``q/8``
through two ReLU dense stages to a hidden vector ``h2``.  Two heads read
``h2``: ``fc_w`` emits the layer's float weights, scaled by ``1/sqrt(fan_in)``
and quantized to ``q`` bits, and ``fc_g`` emits the scalar ``gamma`` that
scales them.  Target biases are ordinary full-precision parameters held by
the net; the blocks do not predict them.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from .constants import (
    BITWIDTH_ENCODING_SCALE,
    DEFAULT_HIDDEN_WIDTH,
    DEFAULT_STE_CLIP,
    MAX_BITWIDTH,
    MIN_BITWIDTH,
)
from .errors import ConfigError, PolicyError, SpecError
from .numerics import Tensor, add, matmul, mul, parameter, relu, reshape
from .quantizer import quantize_weights, validate_bitwidth
from .target_net import LayerSpec, TargetNetSpec, forward_with_weights

logger = logging.getLogger(__name__)


class Dense:
    """Fully connected map ``x @ weight + bias`` with fan-in scaled uniform init."""

    def __init__(self, fan_in: int, fan_out: int, rng: np.random.Generator, name: str) -> None:
        bound = 1.0 / math.sqrt(fan_in)
        self.weight = parameter(rng.uniform(-bound, bound, (fan_in, fan_out)), name=f"{name}.weight")
        self.bias = parameter(rng.uniform(-bound, bound, (fan_out,)), name=f"{name}.bias")

    def __call__(self, x: Tensor) -> Tensor:
        return add(matmul(x, self.weight), self.bias)

    def parameters(self) -> dict[str, Tensor]:
        assert self.weight.name is not None and self.bias.name is not None
        return {self.weight.name: self.weight, self.bias.name: self.bias}


@dataclass
class BlockOutput:
    """Intermediate tensors of one block pass."""

    w_float: Tensor
    w_hat: Tensor
    gamma: Tensor
    weight: Tensor


class MetaBlock:
    """Generates the weights of a single target layer."""

    def __init__(self, layer: LayerSpec, hidden: int, rng: np.random.Generator) -> None:
        prefix = f"blocks.{layer.index}"
        self.layer = layer
        self.weight_shape = layer.weight_shape
        # fc_w output is scaled to the target layer's fan-in
        self.weight_scale = 1.0 / math.sqrt(layer.fan_in)
        self.fc1 = Dense(1, hidden, rng, f"{prefix}.fc1")
        self.fc2 = Dense(hidden, hidden, rng, f"{prefix}.fc2")
        self.fc_w = Dense(hidden, layer.weight_count, rng, f"{prefix}.fc_w")
        self.fc_g = Dense(hidden, 1, rng, f"{prefix}.fc_g")
        # gamma starts at exactly 1
        self.fc_g.weight.data[...] = 0.0
        self.fc_g.bias.data[...] = 1.0

    def parameters(self) -> dict[str, Tensor]:
        params: dict[str, Tensor] = {}
        for stage in (self.fc1, self.fc2, self.fc_w, self.fc_g):
            params.update(stage.parameters())
        return params

    def forward_parts(self, q: int, ste_clip: float = DEFAULT_STE_CLIP, quantize: bool = True) -> BlockOutput:
        code = Tensor([[q / BITWIDTH_ENCODING_SCALE]])
        h1 = relu(self.fc1(code))
        h2 = relu(self.fc2(h1))
        w_float = mul(self.fc_w(h2), Tensor([[self.weight_scale]]))
        w_hat = quantize_weights(w_float, q, ste_clip) if quantize else w_float
        gamma = self.fc_g(h2)
        weight = reshape(mul(w_hat, gamma), self.weight_shape)
        return BlockOutput(w_float=w_float, w_hat=w_hat, gamma=gamma, weight=weight)


class MetaQuantNet:
    """Ordered blocks (one per quantizable layer) plus full-precision target biases."""

    def __init__(
        self,
        spec: TargetNetSpec,
        hidden: int = DEFAULT_HIDDEN_WIDTH,
        ste_clip: float = DEFAULT_STE_CLIP,
        bit_range: tuple[int, int] = (MIN_BITWIDTH, MAX_BITWIDTH),
        seed: int = 0,
        quantize: bool = True,
    ) -> None:
        if hidden < 1:
            raise ConfigError("hypernet.hidden", f"must be positive, got {hidden}")
        if not ste_clip > 0:
            raise ConfigError("hypernet.ste_clip", f"must be positive, got {ste_clip}")
        low, high = bit_range
        validate_bitwidth(low, "bit_range")
        validate_bitwidth(high, "bit_range")
        if low > high:
            raise ConfigError("bit_range", f"empty range [{low}, {high}]")
        for layer in spec.layers:
            if not layer.quantizable:
                raise SpecError(layer.index, "every target layer needs a generating block")
        self.spec = spec
        self.hidden = hidden
        self.ste_clip = ste_clip
        self.bit_range = (low, high)
        self.seed = seed
        self.quantize = quantize
        rng = np.random.default_rng(seed)
        self.blocks = [MetaBlock(layer, hidden, rng) for layer in spec.layers]
        self.biases = [
            parameter(np.zeros(layer.bias_count), name=f"target.{layer.index}.bias") for layer in spec.layers
        ]
        logger.debug("Built MetaQuantNet for %s with %d parameters", spec.name, self.parameter_count)

    def parameters(self) -> dict[str, Tensor]:
        params: dict[str, Tensor] = {}
        for block in self.blocks:
            params.update(block.parameters())
        for bias in self.biases:
            assert bias.name is not None
            params[bias.name] = bias
        return params

    @property
    def parameter_count(self) -> int:
        return sum(p.size for p in self.parameters().values())

    def load_parameters(self, arrays: Mapping[str, np.ndarray]) -> None:
        """Overwrite every parameter from ``arrays`` (keys as in ``parameters()``)."""
        params = self.parameters()
        missing = sorted(set(params) - set(arrays))
        extra = sorted(set(arrays) - set(params))
        if missing or extra:
            raise SpecError(None, f"parameter names differ: missing={missing} unexpected={extra}")
        for name, tensor in params.items():
            array = np.asarray(arrays[name])
            if array.shape != tensor.shape:
                raise SpecError(None, f"{name} has shape {array.shape}, expected {tensor.shape}")
            tensor.data[...] = array

    def check_bitwidth(self, q: int) -> int:
        validate_bitwidth(q)
        low, high = self.bit_range
        if not low <= q <= high:
            raise ConfigError("bitwidth", f"bitwidth {q} outside the active range [{low}, {high}]")
        return int(q)


def block_forward(net: MetaQuantNet, block: MetaBlock, q: int) -> Tensor:
    """Quantized, gamma-scaled weight tensor for ``block`` at bitwidth ``q``."""
    net.check_bitwidth(q)
    return block.forward_parts(q, net.ste_clip, net.quantize).weight


def generate_weights(net: MetaQuantNet, policy: Sequence[int]) -> list[Tensor]:
    """One weight tensor per target layer; block ``i`` sees only ``policy[i]``."""
    bits = list(policy)
    if len(bits) != len(net.blocks):
        raise PolicyError(f"policy of length {len(bits)} for {len(net.blocks)} blocks")
    return [block_forward(net, block, q) for block, q in zip(net.blocks, bits, strict=True)]


def predict_logits(net: MetaQuantNet, policy: Sequence[int], batch: Tensor) -> Tensor:
    """Generate weights for ``policy`` and run the target network on ``batch``."""
    return forward_with_weights(net.spec, generate_weights(net, policy), batch, net.biases)
