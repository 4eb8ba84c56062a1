"""Shared fixtures for MetaQuant tests.

Datasets and networks are kept tiny so the unit suite runs in seconds; the
desk-scale trend checks live behind the ``slow`` marker.
"""

from __future__ import annotations

from collections.abc import Callable
from pathlib import Path
from typing import Any

import pytest
import yaml

from metaquant.constants import EVAL_WORKERS_ENV, OUTPUT_DIR_ENV
from metaquant.datasets import Dataset, make_synthetic
from metaquant.hypernet import MetaQuantNet
from metaquant.target_net import LayerKind, LayerSpec, TargetNetSpec, get_spec


@pytest.fixture(autouse=True)
def _no_env_overrides(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.delenv(OUTPUT_DIR_ENV, raising=False)
    monkeypatch.delenv(EVAL_WORKERS_ENV, raising=False)


@pytest.fixture
def blobs() -> Dataset:
    return make_synthetic("blobs", n=240, classes=4, noise=0.05, seed=0)


@pytest.fixture
def spirals() -> Dataset:
    return make_synthetic("spirals", n=240, classes=3, noise=0.05, seed=0)


@pytest.fixture
def mlp_spec() -> TargetNetSpec:
    return get_spec("mlp-3", class_count=4)


@pytest.fixture
def cnn_spec() -> TargetNetSpec:
    return get_spec("cnn-5", class_count=3)


@pytest.fixture
def mlp_net(mlp_spec: TargetNetSpec) -> MetaQuantNet:
    return MetaQuantNet(mlp_spec, hidden=8, seed=0)


@pytest.fixture
def tiny_spec() -> TargetNetSpec:
    """Two dense layers, 4 -> 3 -> 2, for finite-difference checks."""
    return TargetNetSpec(
        name="tiny",
        input_shape=(4,),
        class_count=2,
        layers=(
            LayerSpec(0, LayerKind.DENSE, (4, 3)),
            LayerSpec(1, LayerKind.DENSE, (3, 2)),
        ),
    )


@pytest.fixture
def write_config(tmp_path: Path) -> Callable[..., Path]:
    """Write a small run config into ``tmp_path`` and return its path."""

    def _write(stage: str, **sections: Any) -> Path:
        data: dict[str, Any] = {
            "stage": stage,
            "target": "mlp-3",
            "dataset": {"kind": "blobs", "n": 160, "classes": 4, "noise": 0.05, "seed": 0},
            "hypernet": {"hidden": 8},
            "train": {"epochs": 2, "batch_size": 32, "warm_epochs": 1, "halve_every": 1},
            "retrain": {"epochs": 1, "batch_size": 32},
            "search": {"population_size": 6, "generations": 2, "parent_count": 2, "eval_samples": 32},
            "constraint": {"target_ratio": 16},
            "output_dir": str(tmp_path / "run"),
        }
        for key, value in sections.items():
            if isinstance(value, dict) and isinstance(data.get(key), dict):
                data[key] = {**data[key], **value}
            else:
                data[key] = value
        path = tmp_path / f"{stage}.yaml"
        path.write_text(yaml.safe_dump(data), encoding="utf-8")
        return path

    return _write
