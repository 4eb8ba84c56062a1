"""Differentiable primitives.

Each op computes its forward result with float64 accumulation, casts back to
the storage dtype and registers a backward rule on the active tape.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import DimensionError, InputError
from .tape import record
from .tensor import Tensor, storage_dtype

_F64 = np.float64


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    if grad.shape == shape:
        return grad
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, dim in enumerate(shape):
        if dim == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _cast(array: np.ndarray) -> np.ndarray:
    return array.astype(storage_dtype(), copy=False)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product of ``a`` (m×k) and ``b`` (k×n)."""
    if a.data.ndim != 2 or b.data.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError(f"matmul shapes {a.shape} and {b.shape} do not compose")
    a64 = a.data.astype(_F64)
    b64 = b.data.astype(_F64)

    def rule(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        g64 = g.astype(_F64)
        return g64 @ b64.T, a64.T @ g64

    return record("matmul", (a, b), _cast(a64 @ b64), rule)


def add(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise sum with numpy broadcasting."""
    try:
        out = np.add(a.data, b.data, dtype=_F64)
    except ValueError as exc:
        raise DimensionError(f"add shapes {a.shape} and {b.shape} do not broadcast") from exc

    def rule(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return record("add", (a, b), _cast(out), rule)


def mul(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise product with numpy broadcasting."""
    try:
        out = np.multiply(a.data, b.data, dtype=_F64)
    except ValueError as exc:
        raise DimensionError(f"mul shapes {a.shape} and {b.shape} do not broadcast") from exc
    a64 = a.data.astype(_F64)
    b64 = b.data.astype(_F64)

    def rule(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return _unbroadcast(g * b64, a.shape), _unbroadcast(g * a64, b.shape)

    return record("mul", (a, b), _cast(out), rule)


def tensor_sum(x: Tensor) -> Tensor:
    """Sum of all elements as a one-element tensor."""
    out = np.array([x.data.sum(dtype=_F64)])

    def rule(g: np.ndarray) -> tuple[np.ndarray]:
        return (np.full(x.shape, g.reshape(-1)[0], dtype=_F64),)

    return record("sum", (x,), _cast(out), rule)


def reshape(x: Tensor, shape: Sequence[int]) -> Tensor:
    try:
        out = x.data.reshape(tuple(shape))
    except ValueError as exc:
        raise DimensionError(f"cannot reshape {x.shape} to {tuple(shape)}") from exc

    def rule(g: np.ndarray) -> tuple[np.ndarray]:
        return (g.reshape(x.shape),)

    return record("reshape", (x,), out.copy(), rule)


def relu(x: Tensor) -> Tensor:
    mask = x.data > 0

    def rule(g: np.ndarray) -> tuple[np.ndarray]:
        return (g * mask,)

    return record("relu", (x,), np.where(mask, x.data, 0).astype(x.data.dtype), rule)


def conv2d(x: Tensor, kernel: Tensor, stride: int = 1, padding: int = 0) -> Tensor:
    """Cross-correlation of ``x`` (N×C×H×W) with ``kernel`` (F×C×kh×kw)."""
    if x.data.ndim != 4 or kernel.data.ndim != 4:
        raise DimensionError(f"conv2d needs 4-D input and kernel, got {x.shape} and {kernel.shape}")
    n, c, h, w = x.shape
    f, kc, kh, kw = kernel.shape
    if kc != c:
        raise DimensionError(f"conv2d kernel has {kc} input channels, input has {c}")
    if stride < 1 or padding < 0:
        raise DimensionError(f"conv2d stride {stride} / padding {padding} invalid")
    if h + 2 * padding < kh or w + 2 * padding < kw:
        raise DimensionError(f"conv2d kernel {kh}x{kw} larger than padded input {h}x{w}+{padding}")

    xp = np.pad(x.data.astype(_F64), ((0, 0), (0, 0), (padding, padding), (padding, padding)))
    k64 = kernel.data.astype(_F64)
    windows = sliding_window_view(xp, (kh, kw), axis=(2, 3))[:, :, ::stride, ::stride]
    h_out, w_out = windows.shape[2], windows.shape[3]
    # (N, C, Ho, Wo, kh, kw) x (F, C, kh, kw) -> (N, Ho, Wo, F)
    out = np.tensordot(windows, k64, axes=([1, 4, 5], [1, 2, 3])).transpose(0, 3, 1, 2)

    def rule(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        g64 = g.astype(_F64)
        grad_kernel = np.tensordot(g64, windows, axes=([0, 2, 3], [0, 2, 3]))
        grad_xp = np.zeros_like(xp)
        for i in range(kh):
            for j in range(kw):
                contrib = np.tensordot(g64, k64[:, :, i, j], axes=([1], [0])).transpose(0, 3, 1, 2)
                grad_xp[
                    :, :, i : i + stride * h_out : stride, j : j + stride * w_out : stride
                ] += contrib
        grad_x = grad_xp[:, :, padding : padding + h, padding : padding + w]
        return grad_x, grad_kernel

    return record("conv2d", (x, kernel), _cast(np.ascontiguousarray(out)), rule)


def maxpool2d(x: Tensor) -> Tensor:
    """Fixed 2×2 max pooling with stride 2."""
    if x.data.ndim != 4 or x.shape[2] % 2 or x.shape[3] % 2:
        raise DimensionError(f"maxpool2d needs N×C×H×W with even H and W, got {x.shape}")
    n, c, h, w = x.shape
    blocks = x.data.reshape(n, c, h // 2, 2, w // 2, 2).transpose(0, 1, 2, 4, 3, 5)
    flat = blocks.reshape(n, c, h // 2, w // 2, 4)
    winner = flat.argmax(axis=-1)
    out = np.take_along_axis(flat, winner[..., None], axis=-1)[..., 0]

    def rule(g: np.ndarray) -> tuple[np.ndarray]:
        routed = np.zeros(flat.shape, dtype=_F64)
        np.put_along_axis(routed, winner[..., None], g[..., None], axis=-1)
        grad = routed.reshape(n, c, h // 2, w // 2, 2, 2).transpose(0, 1, 2, 4, 3, 5)
        return (grad.reshape(n, c, h, w),)

    return record("maxpool2d", (x,), np.ascontiguousarray(out), rule)


def softmax_cross_entropy(logits: Tensor, labels: Sequence[int] | np.ndarray) -> Tensor:
    """Mean cross-entropy of ``logits`` (N×K) against integer ``labels``."""
    if logits.data.ndim != 2:
        raise DimensionError(f"logits must be N×K, got {logits.shape}")
    n, k = logits.shape
    targets = np.asarray(labels, dtype=np.int64).reshape(-1)
    if targets.shape[0] != n:
        raise DimensionError(f"{targets.shape[0]} labels for {n} logit rows")
    if np.any(targets < 0) or np.any(targets >= k):
        raise InputError(f"labels must lie in [0, {k})")

    z = logits.data.astype(_F64)
    z = z - z.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(z).sum(axis=1))
    rows = np.arange(n)
    loss = np.array([(log_norm - z[rows, targets]).mean()])
    probs = np.exp(z - log_norm[:, None])

    def rule(g: np.ndarray) -> tuple[np.ndarray]:
        grad = probs.copy()
        grad[rows, targets] -= 1.0
        return (grad * (g.reshape(-1)[0] / n),)

    return record("softmax_cross_entropy", (logits,), _cast(loss), rule)
