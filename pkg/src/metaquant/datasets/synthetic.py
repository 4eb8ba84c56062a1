"""Seeded synthetic classification data rendered as small single-channel images.

``blobs`` places one Gaussian cluster per class directly in pixel space, so
low noise keeps the classes linearly separable.  ``spirals`` draws points on
interleaved 2-D spiral arms and rasterises each point as a Gaussian spot,
which makes the class boundary nonlinear in pixel space.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from ..constants import DEFAULT_IMAGE_SIZE, DEFAULT_SPLIT
from ..errors import InputError
from .dataset import Dataset, split_indices

KINDS = ("blobs", "spirals")
SPOT_WIDTH = 0.8  # pixels
SPIRAL_TURNS = 0.75


def _blobs(
    n: int, classes: int, noise: float, image_size: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    dim = image_size * image_size
    centers = rng.uniform(0.2, 0.8, size=(classes, dim))
    labels = rng.integers(0, classes, size=n)
    points = centers[labels] + noise * rng.standard_normal((n, dim))
    return np.clip(points, 0.0, 1.0), labels


def _spirals(
    n: int, classes: int, noise: float, image_size: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    labels = rng.integers(0, classes, size=n)
    t = rng.uniform(0.15, 1.0, size=n)
    angle = 2 * np.pi * (labels / classes + SPIRAL_TURNS * t)
    xy = np.stack([t * np.cos(angle), t * np.sin(angle)], axis=1)
    xy += noise * rng.standard_normal(xy.shape)
    # map [-1, 1] onto pixel centres
    pixel = (np.clip(xy, -1.0, 1.0) + 1.0) / 2.0 * (image_size - 1)
    grid = np.arange(image_size)
    dy = (grid[None, :] - pixel[:, 1:2]) ** 2
    dx = (grid[None, :] - pixel[:, 0:1]) ** 2
    images = np.exp(-(dy[:, :, None] + dx[:, None, :]) / (2 * SPOT_WIDTH**2))
    return images.reshape(n, -1), labels


def make_synthetic(
    kind: str,
    n: int,
    classes: int,
    noise: float,
    seed: int,
    image_size: int = DEFAULT_IMAGE_SIZE,
    fractions: Sequence[float] = DEFAULT_SPLIT,
) -> Dataset:
    """Return ``n`` samples of shape ``1×S×S`` with values in [0, 1]."""
    if kind not in KINDS:
        raise InputError(f"unknown synthetic kind {kind!r}; expected one of {KINDS}")
    if classes < 2:
        raise InputError(f"need at least 2 classes, got {classes}")
    if n < classes:
        raise InputError(f"n={n} is smaller than the class count {classes}")
    if noise < 0:
        raise InputError(f"noise must be non-negative, got {noise}")
    if image_size < 2:
        raise InputError(f"image size must be at least 2, got {image_size}")

    rng = np.random.default_rng(seed)
    make = _blobs if kind == "blobs" else _spirals
    flat, labels = make(n, classes, noise, image_size, rng)
    features = flat.reshape(n, 1, image_size, image_size).astype(np.float32)
    return Dataset(
        name=kind,
        features=features,
        labels=labels.astype(np.int64),
        class_count=classes,
        splits=split_indices(n, fractions, seed),
    )
