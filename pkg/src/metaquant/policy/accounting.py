"""Model-size accounting and the hard compression constraint.

The float model stores every quantizable weight in 32 bits; a policy stores
layer ``l`` in ``q_l`` bits per weight.  Biases stay full precision and are
left out of both sides.  With ``include_side_params`` each layer also pays
32 bits for each of gamma, alpha and beta.
"""

from __future__ import annotations

import numbers
from collections.abc import Sequence
from dataclasses import dataclass

from ..constants import FLOAT_BITS, SIDE_PARAMS_PER_LAYER
from ..errors import ConfigError
from ..target_net import TargetNetSpec
from .bitwidth import BitwidthPolicy

BITS_PER_MEGABYTE = 8 * 1_000_000


@dataclass(frozen=True)
class CompressionConstraint:
    """Minimum compression ratio a feasible policy must reach."""

    target_ratio: float
    include_side_params: bool = False

    def __post_init__(self) -> None:
        if isinstance(self.target_ratio, bool) or not isinstance(self.target_ratio, numbers.Real):
            raise ConfigError("constraint.target_ratio", f"expected a number, got {self.target_ratio!r}")
        object.__setattr__(self, "target_ratio", float(self.target_ratio))
        if not self.target_ratio > 1:
            raise ConfigError("constraint.target_ratio", f"must exceed 1, got {self.target_ratio}")


def float_size_bits(spec: TargetNetSpec) -> int:
    return FLOAT_BITS * sum(spec.weight_counts)


def model_size_bits(policy: Sequence[int], spec: TargetNetSpec, constraint: CompressionConstraint) -> int:
    bits = BitwidthPolicy(tuple(policy)).check(spec.layer_count)
    size = sum(n * q for n, q in zip(spec.weight_counts, bits, strict=True))
    if constraint.include_side_params:
        size += SIDE_PARAMS_PER_LAYER * FLOAT_BITS * spec.layer_count
    return size


def compression_ratio(policy: Sequence[int], spec: TargetNetSpec, constraint: CompressionConstraint) -> float:
    return float_size_bits(spec) / model_size_bits(policy, spec, constraint)


def is_feasible(policy: Sequence[int], spec: TargetNetSpec, constraint: CompressionConstraint) -> bool:
    return compression_ratio(policy, spec, constraint) >= constraint.target_ratio


def size_megabytes(size_bits: int) -> float:
    return size_bits / BITS_PER_MEGABYTE
