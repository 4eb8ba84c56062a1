"""Policy fitness: top-1 accuracy of the generated target network."""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from ..datasets import DataSplit
from ..errors import SpecError
from ..hypernet import MetaQuantNet, generate_weights
from ..numerics import Tensor
from ..target_net import TargetNetSpec, forward_with_weights

EVAL_BATCH_SIZE = 256


def evaluate_policy(
    net: MetaQuantNet,
    spec: TargetNetSpec,
    policy: Sequence[int],
    val_subset: DataSplit,
    batch_size: int = EVAL_BATCH_SIZE,
) -> float:
    """Accuracy in [0, 1] of ``policy`` on ``val_subset``; pure for a frozen net."""
    if spec != net.spec:
        raise SpecError(None, f"net was built for {net.spec.name}, not {spec.name}")
    if len(val_subset) == 0:
        return 0.0
    weights = generate_weights(net, policy)
    correct = 0
    for features, labels in val_subset.batches(batch_size):
        logits = forward_with_weights(spec, weights, Tensor(features), net.biases)
        correct += int(np.sum(logits.data.argmax(axis=1) == labels))
    return correct / len(val_subset)


def selection_key(bits: Sequence[int], accuracy: float, ratio: float) -> tuple[float, float, tuple[int, ...]]:
    """Sort key: higher accuracy, then higher ratio, then lexicographically smaller policy."""
    return (-accuracy, -ratio, tuple(bits))
