"""Dense tensor type.

A ``Tensor`` wraps a contiguous numpy array in the active storage dtype
(float32 unless a caller switched precision with ``use_precision``) and an
optional gradient buffer of the same shape.
"""

from __future__ import annotations

import contextlib
import threading
from collections.abc import Iterator
from typing import Any

import numpy as np

from ..errors import NumericalError

_precision = threading.local()


def storage_dtype() -> np.dtype[Any]:
    """Return the dtype new tensors are stored in on this thread."""
    return getattr(_precision, "dtype", np.dtype(np.float32))


@contextlib.contextmanager
def use_precision(dtype: Any) -> Iterator[None]:
    """Temporarily store new tensors in ``dtype`` (used by gradient checks)."""
    previous = storage_dtype()
    _precision.dtype = np.dtype(dtype)
    try:
        yield
    finally:
        _precision.dtype = previous


class Tensor:
    """n-dimensional array with an optional gradient buffer."""

    def __init__(self, data: Any, requires_grad: bool = False, name: str | None = None) -> None:
        array = np.array(data, dtype=storage_dtype())
        if array.ndim == 0:
            array = array.reshape(1)
        self.data: np.ndarray = np.ascontiguousarray(array)
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self.name = name

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.data.shape)

    @property
    def size(self) -> int:
        return int(self.data.size)

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data.reshape(-1)[0])

    def zero_grad(self) -> None:
        self.grad = None

    def detach(self) -> Tensor:
        return Tensor(self.data.copy(), requires_grad=False, name=self.name)

    def check_finite(self, where: str) -> None:
        if not np.all(np.isfinite(self.data)):
            raise NumericalError(f"Non-finite values in output of {where}")

    def __repr__(self) -> str:
        label = f", name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad}{label})"

    # Operators delegate to numerics.ops so they are recorded on the tape.
    def __matmul__(self, other: Tensor) -> Tensor:
        from .ops import matmul

        return matmul(self, other)

    def __add__(self, other: Tensor) -> Tensor:
        from .ops import add

        return add(self, other)

    def __mul__(self, other: Tensor) -> Tensor:
        from .ops import mul

        return mul(self, other)

    def reshape(self, *shape: int) -> Tensor:
        from .ops import reshape

        return reshape(self, shape)


def parameter(data: Any, name: str | None = None) -> Tensor:
    """Return a trainable tensor."""
    return Tensor(data, requires_grad=True, name=name)
