"""Reader and writer for IDX image/label files.

Images (big-endian)::

    offset  type     value
    0000    int32    0x00000803  magic (unsigned byte data, 3 dimensions)
    0004    int32    N           number of images
    0008    int32    R           rows
    0012    int32    C           columns
    0016    uint8[]  pixels, row-major

Labels::

    0000    int32    0x00000801  magic (unsigned byte data, 1 dimension)
    0004    int32    N           number of labels
    0008    uint8[]  labels
"""

from __future__ import annotations

import struct
from collections.abc import Sequence
from pathlib import Path

import numpy as np

from ..constants import DEFAULT_SPLIT
from ..errors import FormatError
from .dataset import Dataset, split_indices

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801


def _read_header(blob: bytes, magic: int, dims: int, path: Path) -> tuple[int, ...]:
    need = 4 * (1 + dims)
    if len(blob) < need:
        raise FormatError(f"{path}: header truncated", len(blob))
    found = struct.unpack_from(">I", blob, 0)[0]
    if found != magic:
        raise FormatError(f"{path}: magic 0x{found:08x}, expected 0x{magic:08x}", 0)
    return struct.unpack_from(f">{dims}I", blob, 4)


def read_idx_images(path: Path) -> np.ndarray:
    blob = path.read_bytes()
    count, rows, cols = _read_header(blob, IMAGE_MAGIC, 3, path)
    body = blob[16:]
    expected = count * rows * cols
    if len(body) < expected:
        raise FormatError(f"{path}: {len(body)} pixel bytes, expected {expected}", 16 + len(body))
    return np.frombuffer(body, dtype=np.uint8, count=expected).reshape(count, rows, cols)


def read_idx_labels(path: Path) -> np.ndarray:
    blob = path.read_bytes()
    (count,) = _read_header(blob, LABEL_MAGIC, 1, path)
    body = blob[8:]
    if len(body) < count:
        raise FormatError(f"{path}: {len(body)} label bytes, expected {count}", 8 + len(body))
    return np.frombuffer(body, dtype=np.uint8, count=count)


def write_idx(images: np.ndarray, labels: np.ndarray, images_path: Path, labels_path: Path) -> None:
    """Write ``images`` (N×R×C uint8) and ``labels`` (N uint8) as an IDX pair."""
    images = np.asarray(images, dtype=np.uint8)
    labels = np.asarray(labels, dtype=np.uint8).reshape(-1)
    if images.ndim != 3:
        raise FormatError(f"images must be N×R×C, got shape {images.shape}")
    count, rows, cols = images.shape
    images_path.write_bytes(struct.pack(">IIII", IMAGE_MAGIC, count, rows, cols) + images.tobytes())
    labels_path.write_bytes(struct.pack(">II", LABEL_MAGIC, labels.shape[0]) + labels.tobytes())


def load_idx(
    images_path: Path | str,
    labels_path: Path | str,
    seed: int = 0,
    fractions: Sequence[float] = DEFAULT_SPLIT,
    class_count: int | None = None,
) -> Dataset:
    """Load an IDX pair as ``N×1×R×C`` features scaled to [0, 1].

    Without ``class_count`` the class count is ``max(label) + 1``.
    """
    images_path, labels_path = Path(images_path), Path(labels_path)
    images = read_idx_images(images_path)
    labels = read_idx_labels(labels_path)
    if images.shape[0] != labels.shape[0]:
        raise FormatError(f"{images.shape[0]} images but {labels.shape[0]} labels", 4)
    features = (images.astype(np.float32) / 255.0)[:, None, :, :]
    classes = class_count if class_count is not None else int(labels.max()) + 1 if labels.size else 1
    return Dataset(
        name=images_path.stem,
        features=features,
        labels=labels.astype(np.int64),
        class_count=classes,
        splits=split_indices(labels.shape[0], fractions, seed),
    )
