"""Target network descriptions and their forward pass.

A target network owns no parameters: every weight tensor (and, optionally,
every bias) is supplied by the caller, normally the hypernetwork.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum

from .constants import DEFAULT_IMAGE_SIZE
from .errors import DimensionError, SpecError, UnknownSpecError
from .numerics import Tensor, add, conv2d, matmul, maxpool2d, relu, reshape


class LayerKind(str, Enum):
    DENSE = "dense"
    CONV2D = "conv2d"


class Activation(str, Enum):
    RELU = "relu"
    NONE = "none"


@dataclass(frozen=True)
class LayerSpec:
    """One weight-carrying layer.

    Dense weights are ``(in, out)``; conv kernels are ``(F, C, kh, kw)``.
    ``pool`` applies a fixed 2×2 max pool after the activation.
    """

    index: int
    kind: LayerKind
    weight_shape: tuple[int, ...]
    activation: Activation = Activation.RELU
    quantizable: bool = True
    stride: int = 1
    padding: int = 0
    pool: bool = False

    def __post_init__(self) -> None:
        expected = 2 if self.kind is LayerKind.DENSE else 4
        if len(self.weight_shape) != expected or any(d <= 0 for d in self.weight_shape):
            raise SpecError(self.index, f"{self.kind.value} weight shape {self.weight_shape} invalid")

    @property
    def weight_count(self) -> int:
        return math.prod(self.weight_shape)

    @property
    def bias_count(self) -> int:
        return self.weight_shape[-1] if self.kind is LayerKind.DENSE else self.weight_shape[0]

    @property
    def fan_in(self) -> int:
        return self.weight_shape[0] if self.kind is LayerKind.DENSE else math.prod(self.weight_shape[1:])


@dataclass(frozen=True)
class TargetNetSpec:
    """Ordered layers plus the input shape (without batch) and class count."""

    name: str
    layers: tuple[LayerSpec, ...]
    input_shape: tuple[int, ...]
    class_count: int

    def __post_init__(self) -> None:
        shape = self.input_shape
        for position, layer in enumerate(self.layers):
            if layer.index != position:
                raise SpecError(layer.index, f"layer listed at position {position}")
            shape = _layer_output_shape(layer, shape)
        if shape != (self.class_count,):
            raise SpecError(None, f"network emits {shape}, expected ({self.class_count},)")

    @property
    def quantizable_layers(self) -> tuple[LayerSpec, ...]:
        return tuple(layer for layer in self.layers if layer.quantizable)

    @property
    def layer_count(self) -> int:
        return len(self.quantizable_layers)

    @property
    def weight_counts(self) -> tuple[int, ...]:
        return tuple(layer.weight_count for layer in self.quantizable_layers)


def _layer_output_shape(layer: LayerSpec, shape: tuple[int, ...]) -> tuple[int, ...]:
    if layer.kind is LayerKind.DENSE:
        fan_in = math.prod(shape)
        if fan_in != layer.weight_shape[0]:
            raise SpecError(layer.index, f"dense layer expects {layer.weight_shape[0]} inputs, gets {fan_in}")
        return (layer.weight_shape[1],)
    if len(shape) != 3:
        raise SpecError(layer.index, f"conv2d layer needs C×H×W input, gets {shape}")
    c, h, w = shape
    f, kc, kh, kw = layer.weight_shape
    if kc != c:
        raise SpecError(layer.index, f"conv2d kernel expects {kc} channels, gets {c}")
    h_out = (h + 2 * layer.padding - kh) // layer.stride + 1
    w_out = (w + 2 * layer.padding - kw) // layer.stride + 1
    if h_out <= 0 or w_out <= 0:
        raise SpecError(layer.index, f"conv2d output collapses for input {shape}")
    if layer.pool:
        if h_out % 2 or w_out % 2:
            raise SpecError(layer.index, f"2x2 pooling needs even spatial dims, gets {h_out}x{w_out}")
        h_out, w_out = h_out // 2, w_out // 2
    return (f, h_out, w_out)


def forward_with_weights(
    spec: TargetNetSpec,
    weights: Sequence[Tensor],
    batch: Tensor,
    biases: Sequence[Tensor] | None = None,
) -> Tensor:
    """Run ``spec`` on ``batch`` with externally supplied weights; return logits."""
    if len(weights) != len(spec.layers):
        raise SpecError(None, f"{len(weights)} weight tensors for {len(spec.layers)} layers")
    if biases is not None and len(biases) != len(spec.layers):
        raise SpecError(None, f"{len(biases)} bias tensors for {len(spec.layers)} layers")
    per_sample = math.prod(spec.input_shape)
    if batch.size % per_sample or batch.size == 0:
        raise SpecError(None, f"batch of shape {batch.shape} does not match input {spec.input_shape}")
    n = batch.size // per_sample

    x = reshape(batch, (n, *spec.input_shape))
    for layer, weight in zip(spec.layers, weights, strict=True):
        if weight.shape != layer.weight_shape:
            raise SpecError(layer.index, f"weight shape {weight.shape}, expected {layer.weight_shape}")
        bias = biases[layer.index] if biases is not None else None
        if bias is not None and bias.shape != (layer.bias_count,):
            raise SpecError(layer.index, f"bias shape {bias.shape}, expected ({layer.bias_count},)")
        try:
            if layer.kind is LayerKind.DENSE:
                if len(x.shape) != 2:
                    x = reshape(x, (n, -1))
                x = matmul(x, weight)
                if bias is not None:
                    x = add(x, bias)
            else:
                x = conv2d(x, weight, stride=layer.stride, padding=layer.padding)
                if bias is not None:
                    x = add(x, reshape(bias, (1, layer.bias_count, 1, 1)))
        except DimensionError as exc:
            raise SpecError(layer.index, str(exc)) from exc
        if layer.activation is Activation.RELU:
            x = relu(x)
        if layer.pool:
            x = maxpool2d(x)
    return x


def _mlp3(class_count: int, image_size: int) -> TargetNetSpec:
    fan_in = image_size * image_size
    return TargetNetSpec(
        name="mlp-3",
        input_shape=(1, image_size, image_size),
        class_count=class_count,
        layers=(
            LayerSpec(0, LayerKind.DENSE, (fan_in, 32)),
            LayerSpec(1, LayerKind.DENSE, (32, 16)),
            LayerSpec(2, LayerKind.DENSE, (16, class_count), activation=Activation.NONE),
        ),
    )


def _cnn5(class_count: int, image_size: int) -> TargetNetSpec:
    if image_size % 4:
        raise SpecError(None, f"cnn-5 needs an image size divisible by 4, got {image_size}")
    flat = 8 * (image_size // 4) ** 2
    return TargetNetSpec(
        name="cnn-5",
        input_shape=(1, image_size, image_size),
        class_count=class_count,
        layers=(
            LayerSpec(0, LayerKind.CONV2D, (4, 1, 3, 3), padding=1),
            LayerSpec(1, LayerKind.CONV2D, (8, 4, 3, 3), padding=1, pool=True),
            LayerSpec(2, LayerKind.CONV2D, (8, 8, 3, 3), padding=1, pool=True),
            LayerSpec(3, LayerKind.DENSE, (flat, 16)),
            LayerSpec(4, LayerKind.DENSE, (16, class_count), activation=Activation.NONE),
        ),
    )


def builtin_specs(class_count: int = 4, image_size: int = DEFAULT_IMAGE_SIZE) -> dict[str, TargetNetSpec]:
    """Return the desk-scale target catalog.

    ``mlp-3``: S²→32→16→K dense.  ``cnn-5``: conv 1→4, conv 4→8 + pool,
    conv 8→8 + pool (3×3, pad 1), then dense →16→K.
    """
    return {
        "mlp-3": _mlp3(class_count, image_size),
        "cnn-5": _cnn5(class_count, image_size),
    }


def get_spec(name: str, class_count: int = 4, image_size: int = DEFAULT_IMAGE_SIZE) -> TargetNetSpec:
    catalog = builtin_specs(class_count, image_size)
    if name not in catalog:
        raise UnknownSpecError(f"Unknown target network {name!r}; known: {', '.join(sorted(catalog))}")
    return catalog[name]
