"""Define-by-run computation tape.

Primitive operations executed while a tape is active (``with
ComputationTape() as tape:``) are appended to it together with their
backward rule.  ``backward`` replays the entries in reverse order.  The
active tape is thread-local, so independent workers each own their own.
"""

from __future__ import annotations

import logging
import threading
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from types import TracebackType

import numpy as np

from ..errors import NumericalError, StateError
from .tensor import Tensor

logger = logging.getLogger(__name__)

BackwardRule = Callable[[np.ndarray], Sequence[np.ndarray | None]]

_local = threading.local()


@dataclass
class TapeEntry:
    """One recorded primitive."""

    op: str
    inputs: tuple[Tensor, ...]
    output: Tensor
    backward: BackwardRule


class ComputationTape:
    """Ordered record of primitive operations for one forward pass."""

    def __init__(self, check_finite: bool = True) -> None:
        self.entries: list[TapeEntry] = []
        self.check_finite = check_finite
        self._consumed = False

    def __enter__(self) -> ComputationTape:
        stack = _stack()
        stack.append(self)
        return self

    def __exit__(
        self,
        exc_type: type[BaseException] | None,
        exc: BaseException | None,
        tb: TracebackType | None,
    ) -> None:
        stack = _stack()
        if stack and stack[-1] is self:
            stack.pop()

    def record(self, op: str, inputs: Sequence[Tensor], output: Tensor, rule: BackwardRule) -> None:
        if self.check_finite:
            output.check_finite(op)
        self.entries.append(TapeEntry(op=op, inputs=tuple(inputs), output=output, backward=rule))

    def backward(self, loss: Tensor) -> None:
        backward(self, loss)


def _stack() -> list[ComputationTape]:
    if not hasattr(_local, "stack"):
        _local.stack = []
    stack: list[ComputationTape] = _local.stack
    return stack


def active_tape() -> ComputationTape | None:
    stack = _stack()
    return stack[-1] if stack else None


def record(op: str, inputs: Sequence[Tensor], output_data: np.ndarray, rule: BackwardRule) -> Tensor:
    """Wrap ``output_data`` in a tensor and record it if any input needs a gradient.

    With no active tape the op runs in inference mode and nothing is kept;
    the output is still checked for NaN/Inf.
    """
    tape = active_tape()
    needs_grad = tape is not None and any(t.requires_grad for t in inputs)
    output = Tensor(output_data, requires_grad=needs_grad, name=op)
    if needs_grad and tape is not None:
        tape.record(op, inputs, output, rule)
    elif tape is None or tape.check_finite:
        output.check_finite(op)
    return output


def backward(tape: ComputationTape, loss: Tensor) -> None:
    """Populate ``grad`` on every tensor that requires one.

    Gradients accumulate into existing parameter buffers; callers zero them
    between steps.
    """
    if tape._consumed:
        raise StateError("backward already replayed on this tape")
    if not tape.entries or not any(e.output is loss for e in tape.entries):
        raise StateError("backward called before a forward pass recorded the loss")
    if loss.size != 1:
        raise StateError(f"backward needs a scalar loss, got shape {loss.shape}")

    grads: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
    touched: dict[int, Tensor] = {id(loss): loss}
    for entry in reversed(tape.entries):
        upstream = grads.get(id(entry.output))
        if upstream is None:
            continue
        input_grads = entry.backward(upstream)
        for tensor, g in zip(entry.inputs, input_grads, strict=True):
            if g is None or not tensor.requires_grad:
                continue
            key = id(tensor)
            if key in grads:
                grads[key] = grads[key] + g
            else:
                grads[key] = g
                touched[key] = tensor

    for key, tensor in touched.items():
        g = np.asarray(grads[key], dtype=tensor.data.dtype).reshape(tensor.shape)
        if tape.check_finite and not np.all(np.isfinite(g)):
            raise NumericalError(f"Non-finite gradient for {tensor!r}")
        tensor.grad = g if tensor.grad is None else tensor.grad + g
    tape._consumed = True
    logger.debug("backward replayed %d entries", len(tape.entries))
