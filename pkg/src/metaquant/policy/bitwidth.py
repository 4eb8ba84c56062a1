"""Bitwidth policies and bit ranges."""

from __future__ import annotations

from collections.abc import Iterator, Sequence
from dataclasses import dataclass

from ..constants import MAX_BITWIDTH, MIN_BITWIDTH
from ..errors import ConfigError, PolicyError
from ..quantizer import validate_bitwidth


def validate_bit_range(bit_range: Sequence[int], field: str = "bit_range") -> tuple[int, int]:
    """Return ``bit_range`` as an inclusive ``(q_min, q_max)`` pair."""
    if len(bit_range) != 2:
        raise ConfigError(field, f"expected [q_min, q_max], got {list(bit_range)}")
    low = validate_bitwidth(bit_range[0], field)
    high = validate_bitwidth(bit_range[1], field)
    if low > high:
        raise ConfigError(field, f"q_min {low} exceeds q_max {high}")
    return low, high


def preset_bit_range(target_ratio: float) -> tuple[int, int]:
    """Search range narrowed with the compression target.

    Up to 10x the full [1, 8] range is searched, up to 20x [1, 5], and
    beyond that [1, 3].
    """
    if target_ratio <= 10:
        return MIN_BITWIDTH, MAX_BITWIDTH
    if target_ratio <= 20:
        return MIN_BITWIDTH, 5
    return MIN_BITWIDTH, 3


@dataclass(frozen=True)
class BitwidthPolicy:
    """One bitwidth per quantizable target layer."""

    bits: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.bits:
            raise PolicyError("a policy needs at least one layer")
        for i, q in enumerate(self.bits):
            try:
                validate_bitwidth(q)
            except ConfigError as exc:
                raise PolicyError(f"layer {i}: {exc}") from exc
        object.__setattr__(self, "bits", tuple(int(q) for q in self.bits))

    @classmethod
    def uniform(cls, q: int, layers: int) -> BitwidthPolicy:
        return cls((q,) * layers)

    def __len__(self) -> int:
        return len(self.bits)

    def __iter__(self) -> Iterator[int]:
        return iter(self.bits)

    def __getitem__(self, index: int) -> int:
        return self.bits[index]

    def __str__(self) -> str:
        return "-".join(str(q) for q in self.bits)

    def check(self, layers: int, bit_range: Sequence[int] | None = None) -> BitwidthPolicy:
        """Raise ``PolicyError`` unless the policy fits ``layers`` and ``bit_range``."""
        if len(self.bits) != layers:
            raise PolicyError(f"policy {self} has {len(self.bits)} entries for {layers} layers")
        if bit_range is not None:
            low, high = bit_range
            outside = [q for q in self.bits if not low <= q <= high]
            if outside:
                raise PolicyError(f"policy {self} leaves bit range [{low}, {high}]")
        return self

    def normalized(self, q_max: int | None = None) -> tuple[float, ...]:
        """Per-layer ``q_l / q_max`` (``q_max`` defaults to the policy's own maximum)."""
        top = q_max if q_max is not None else max(self.bits)
        return tuple(q / top for q in self.bits)
