"""SGD with momentum and coupled weight decay, plus the step learning-rate schedule."""

from __future__ import annotations

from collections.abc import Mapping

import numpy as np

from ..numerics import Tensor


def learning_rate(epoch: int, lr_initial: float, warm_epochs: int, halve_every: int) -> float:
    """``lr_initial`` for the first ``warm_epochs``, then halved every ``halve_every`` epochs."""
    if epoch < warm_epochs:
        return lr_initial
    return lr_initial * 0.5 ** ((epoch - warm_epochs) // halve_every + 1)


def global_grad_norm(params: Mapping[str, Tensor]) -> float:
    """L2 norm of all gradients taken together, accumulated in float64."""
    total = 0.0
    for p in params.values():
        if p.grad is not None:
            total += float(np.sum(np.square(p.grad, dtype=np.float64)))
    return float(np.sqrt(total))


class SGD:
    """``v <- mu*v + g + wd*w``; ``w <- w - lr*v`` over named parameters.

    With ``grad_clip`` set, ``g`` is rescaled so its global norm never exceeds it.
    """

    def __init__(
        self,
        params: Mapping[str, Tensor],
        lr: float,
        momentum: float = 0.0,
        weight_decay: float = 0.0,
        grad_clip: float | None = None,
    ) -> None:
        self.params = dict(params)
        self.lr = lr
        self.momentum = momentum
        self.weight_decay = weight_decay
        self.grad_clip = grad_clip
        self.last_grad_norm = 0.0
        self.velocity: dict[str, np.ndarray] = {
            name: np.zeros_like(p.data) for name, p in self.params.items()
        }

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.zero_grad()

    def step(self) -> None:
        self.last_grad_norm = global_grad_norm(self.params)
        scale = 1.0
        if self.grad_clip is not None and self.last_grad_norm > self.grad_clip:
            scale = self.grad_clip / (self.last_grad_norm + 1e-6)
        for name, p in self.params.items():
            grad = p.grad if p.grad is not None else np.zeros_like(p.data)
            v = self.velocity[name]
            v *= self.momentum
            v += scale * grad
            if self.weight_decay:
                v += self.weight_decay * p.data
            p.data -= (self.lr * v).astype(p.data.dtype)
