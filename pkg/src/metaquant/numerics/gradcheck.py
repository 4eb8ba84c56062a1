"""Central finite-difference gradient checking."""

from __future__ import annotations

from collections.abc import Callable

import numpy as np

from .tensor import Tensor


def numerical_gradient(loss_fn: Callable[[], float], tensor: Tensor, h: float = 1e-3) -> np.ndarray:
    """Estimate d loss / d tensor by central differences.

    ``loss_fn`` re-runs the forward pass and reads ``tensor.data`` in place;
    the original values are restored afterwards.
    """
    flat = tensor.data.reshape(-1)
    grad = np.zeros(flat.shape, dtype=np.float64)
    for i in range(flat.size):
        original = flat[i]
        flat[i] = original + h
        plus = float(loss_fn())
        flat[i] = original - h
        minus = float(loss_fn())
        flat[i] = original
        grad[i] = (plus - minus) / (2.0 * h)
    return grad.reshape(tensor.shape)


def gradient_agreement(
    analytic: np.ndarray,
    numeric: np.ndarray,
    rtol: float = 1e-3,
    floor: float = 1e-6,
) -> float:
    """Fraction of coordinates (with magnitude above ``floor``) within ``rtol``.

    Returns 1.0 when no coordinate is large enough to compare.
    """
    a = np.asarray(analytic, dtype=np.float64).reshape(-1)
    n = np.asarray(numeric, dtype=np.float64).reshape(-1)
    scale = np.maximum(np.abs(a), np.abs(n))
    considered = scale > floor
    if not np.any(considered):
        return 1.0
    rel = np.abs(a - n)[considered] / scale[considered]
    return float(np.mean(rel <= rtol))
