"""Uniform weight quantizer with min-max scaling and a straight-through gradient.

Forward: ``W_hat = alpha * Q(clamp((W - beta) / alpha), q) + beta`` where
``alpha = max(W) - min(W)``, ``beta = min(W)`` and ``Q`` rounds to the
``2**q - 1`` equally spaced levels of [0, 1] (ties away from zero).

Backward: the upstream gradient passes where ``|W| < ste_clip`` and is zero
elsewhere.  ``alpha`` and ``beta`` are treated as constants.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import DEFAULT_STE_CLIP, MAX_BITWIDTH, MIN_BITWIDTH
from .errors import ConfigError, DimensionError, InputError
from .numerics import Tensor, record

_F64 = np.float64


def validate_bitwidth(q: int, field: str = "bitwidth") -> int:
    if isinstance(q, bool) or not isinstance(q, (int, np.integer)):
        raise ConfigError(field, f"expected an integer bitwidth, got {q!r}")
    if not MIN_BITWIDTH <= q <= MAX_BITWIDTH:
        raise ConfigError(field, f"bitwidth {q} outside [{MIN_BITWIDTH}, {MAX_BITWIDTH}]")
    return int(q)


@dataclass(frozen=True)
class QuantizerConfig:
    """Bitwidth and STE pass-through band for one quantizer call."""

    bitwidth: int
    ste_clip: float = DEFAULT_STE_CLIP

    def __post_init__(self) -> None:
        validate_bitwidth(self.bitwidth)
        if not self.ste_clip > 0:
            raise ConfigError("ste_clip", f"must be positive, got {self.ste_clip}")

    @property
    def levels(self) -> int:
        return (1 << self.bitwidth) - 1


@dataclass(frozen=True)
class ScaleParams:
    """Min-max scaling: ``alpha`` is the range, ``beta`` the offset."""

    alpha: float
    beta: float


def _round_levels(unit: np.ndarray, levels: int) -> np.ndarray:
    # Inputs are clamped to [0, 1], so floor(x + 0.5) rounds half away from zero.
    clamped = np.clip(unit.astype(_F64), 0.0, 1.0)
    return np.floor(clamped * levels + 0.5) / levels


def quantize_unit(x: Tensor, q: int) -> Tensor:
    """Snap values in [0, 1] to the nearest of the ``2**q`` uniform levels."""
    cfg = QuantizerConfig(bitwidth=q)
    return Tensor(_round_levels(x.data, cfg.levels))


def _minmax(data: np.ndarray) -> ScaleParams:
    if data.size == 0:
        raise InputError("cannot scale an empty tensor")
    low = float(data.min())
    high = float(data.max())
    return ScaleParams(alpha=high - low, beta=low)


def scale_minmax(w: Tensor) -> tuple[Tensor, ScaleParams]:
    """Map ``w`` onto [0, 1]; a constant tensor maps to all zeros."""
    params = _minmax(w.data)
    if params.alpha == 0:
        return Tensor(np.zeros(w.shape)), params
    scaled = (w.data.astype(_F64) - params.beta) / params.alpha
    return Tensor(scaled), params


def _quantize_array(data: np.ndarray, q: int) -> np.ndarray:
    params = _minmax(data)
    if params.alpha == 0:
        return data.copy()
    levels = (1 << q) - 1
    unit = (data.astype(_F64) - params.beta) / params.alpha
    return params.alpha * _round_levels(unit, levels) + params.beta


def ste_backward(upstream_grad: np.ndarray, w: np.ndarray, ste_clip: float) -> np.ndarray:
    """Straight-through gradient: keep ``upstream_grad`` where ``|w| < ste_clip``."""
    if upstream_grad.shape != w.shape:
        raise DimensionError(f"STE shapes {upstream_grad.shape} and {w.shape} differ")
    return np.where(np.abs(w) < ste_clip, upstream_grad, 0.0)


def quantize_weights(w: Tensor, q: int, ste_clip: float = DEFAULT_STE_CLIP) -> Tensor:
    """Quantize ``w`` to at most ``2**q`` values, preserving its min and max.

    When a tape is active the op is recorded with ``ste_backward`` as its
    gradient rule instead of the (almost everywhere zero) true derivative.
    """
    cfg = QuantizerConfig(bitwidth=q, ste_clip=ste_clip)
    source = w.data.copy()

    def rule(g: np.ndarray) -> tuple[np.ndarray]:
        return (ste_backward(g, source, cfg.ste_clip),)

    return record("quantize", (w,), _quantize_array(source, cfg.bitwidth), rule)
