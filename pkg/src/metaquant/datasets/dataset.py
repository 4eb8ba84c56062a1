"""In-memory labelled datasets with deterministic train/val/test splits."""

from __future__ import annotations

from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field

import numpy as np

from ..constants import DEFAULT_SPLIT
from ..errors import InputError

SPLIT_NAMES = ("train", "val", "test")


@dataclass(frozen=True)
class DataSplit:
    """Features and labels of one split."""

    features: np.ndarray
    labels: np.ndarray

    def __len__(self) -> int:
        return int(self.labels.shape[0])

    def head(self, count: int) -> DataSplit:
        return DataSplit(self.features[:count], self.labels[:count])

    def batches(
        self, batch_size: int, rng: np.random.Generator | None = None
    ) -> Iterator[tuple[np.ndarray, np.ndarray]]:
        """Yield minibatches, shuffled when ``rng`` is given."""
        if batch_size < 1:
            raise InputError(f"batch size must be positive, got {batch_size}")
        order = rng.permutation(len(self)) if rng is not None else np.arange(len(self))
        for start in range(0, len(self), batch_size):
            idx = order[start : start + batch_size]
            yield self.features[idx], self.labels[idx]


@dataclass(frozen=True)
class Dataset:
    """Features in [0, 1], integer labels in [0, class_count) and disjoint split indices."""

    name: str
    features: np.ndarray
    labels: np.ndarray
    class_count: int
    splits: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.features.shape[0] != self.labels.shape[0]:
            raise InputError(f"{self.features.shape[0]} samples but {self.labels.shape[0]} labels")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.class_count):
            raise InputError(f"labels must lie in [0, {self.class_count})")

    def __len__(self) -> int:
        return int(self.labels.shape[0])

    @property
    def sample_shape(self) -> tuple[int, ...]:
        return tuple(self.features.shape[1:])

    def split(self, name: str) -> DataSplit:
        if name not in self.splits:
            raise InputError(f"unknown split {name!r}; have {sorted(self.splits)}")
        idx = self.splits[name]
        return DataSplit(self.features[idx], self.labels[idx])


def split_indices(count: int, fractions: Sequence[float] = DEFAULT_SPLIT, seed: int = 0) -> dict[str, np.ndarray]:
    """Partition ``range(count)`` into disjoint train/val/test index sets."""
    if len(fractions) != len(SPLIT_NAMES) or any(f < 0 for f in fractions):
        raise InputError(f"split fractions must be three non-negative numbers, got {list(fractions)}")
    total = float(sum(fractions))
    if total <= 0:
        raise InputError("split fractions sum to zero")
    order = np.random.default_rng(seed).permutation(count)
    n_train = int(round(count * fractions[0] / total))
    n_val = int(round(count * fractions[1] / total))
    n_val = min(n_val, count - n_train)
    return {
        "train": np.sort(order[:n_train]),
        "val": np.sort(order[n_train : n_train + n_val]),
        "test": np.sort(order[n_train + n_val :]),
    }
