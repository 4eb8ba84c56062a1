"""Desk-scale datasets: synthetic generators and an IDX reader."""

from .dataset import SPLIT_NAMES, Dataset, DataSplit, split_indices
from .idx import load_idx, read_idx_images, read_idx_labels, write_idx
from .synthetic import make_synthetic

__all__ = [
    "SPLIT_NAMES",
    "Dataset",
    "DataSplit",
    "split_indices",
    "load_idx",
    "read_idx_images",
    "read_idx_labels",
    "write_idx",
    "make_synthetic",
]
