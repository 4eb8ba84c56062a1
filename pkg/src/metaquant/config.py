"""Run configuration loading for MetaQuant.

A run is described by one YAML file with nested sections::

    stage: full-pipeline
    target: mlp-3
    dataset: {kind: blobs, n: 1200, classes: 4, noise: 0.05}
    train: {epochs: 40, bit_range: [1, 8]}
    search: {generations: 20}
    constraint: {target_ratio: 16}

Every key may be overridden with a dotted flag of the same name
(``--train.epochs 5``).  A ``.env`` file is loaded first so that
``METAQUANT_OUTPUT_DIR`` can redirect artifacts without editing the file.
"""

from __future__ import annotations

import dataclasses
import os
import typing
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any

import yaml
from dotenv import load_dotenv

from .constants import (
    DEFAULT_CLASSES,
    DEFAULT_HIDDEN_WIDTH,
    DEFAULT_IMAGE_SIZE,
    DEFAULT_SPLIT,
    DEFAULT_STE_CLIP,
    OUTPUT_DIR_ENV,
)
from .datasets import Dataset, load_idx, make_synthetic
from .errors import ConfigError
from .policy import BitwidthPolicy, CompressionConstraint, SearchConfig
from .trainer import TrainConfig, TrainMode


class Stage(str, Enum):
    TRAIN = "train"
    SEARCH = "search"
    RETRAIN = "retrain"
    UNIFORM_SWEEP = "uniform-sweep"
    FULL_PIPELINE = "full-pipeline"


DATASET_KINDS = ("blobs", "spirals", "idx")


@dataclass(frozen=True)
class DatasetConfig:
    """Where samples come from.  ``kind: idx`` reads ``images_path``/``labels_path``.

    ``classes`` left unset means 4 for synthetic data and ``max(label) + 1`` for IDX files.
    """

    kind: str = "blobs"
    n: int = 1200
    classes: int | None = None
    noise: float = 0.05
    seed: int = 0
    image_size: int = DEFAULT_IMAGE_SIZE
    fractions: tuple[float, ...] = DEFAULT_SPLIT
    images_path: str | None = None
    labels_path: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in DATASET_KINDS:
            raise ConfigError("dataset.kind", f"expected one of {list(DATASET_KINDS)}, got {self.kind!r}")
        if self.kind == "idx" and (self.images_path is None or self.labels_path is None):
            raise ConfigError("dataset.images_path", "idx datasets need images_path and labels_path")
        if self.classes is not None and self.classes < 2:
            raise ConfigError("dataset.classes", f"need at least 2 classes, got {self.classes}")

    def build(self) -> Dataset:
        if self.kind == "idx":
            assert self.images_path is not None and self.labels_path is not None
            return load_idx(
                Path(self.images_path), Path(self.labels_path), seed=self.seed, fractions=self.fractions,
                class_count=self.classes,
            )
        return make_synthetic(
            self.kind,
            n=self.n,
            classes=self.classes if self.classes is not None else DEFAULT_CLASSES,
            noise=self.noise,
            seed=self.seed,
            image_size=self.image_size,
            fractions=self.fractions,
        )


@dataclass(frozen=True)
class HypernetConfig:
    hidden: int = DEFAULT_HIDDEN_WIDTH
    ste_clip: float = DEFAULT_STE_CLIP
    seed: int = 0

    def __post_init__(self) -> None:
        if self.hidden < 1:
            raise ConfigError("hypernet.hidden", f"must be positive, got {self.hidden}")
        if not self.ste_clip > 0:
            raise ConfigError("hypernet.ste_clip", f"must be positive, got {self.ste_clip}")


@dataclass(frozen=True)
class SweepConfig:
    """Uniform bitwidths to retrain; ``float_baseline`` adds a full-precision row."""

    bits: tuple[int, ...] = (1, 2, 4, 8)
    float_baseline: bool = True

    def __post_init__(self) -> None:
        if not self.bits:
            raise ConfigError("sweep.bits", "needs at least one bitwidth")
        BitwidthPolicy(tuple(self.bits))


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved description of one CLI run."""

    stage: Stage
    target: str = "mlp-3"
    dataset: DatasetConfig = field(default_factory=DatasetConfig)
    hypernet: HypernetConfig = field(default_factory=HypernetConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    retrain: TrainConfig = field(default_factory=lambda: TrainConfig(mode=TrainMode.RETRAIN))
    search: SearchConfig = field(default_factory=SearchConfig)
    constraint: CompressionConstraint = field(default_factory=lambda: CompressionConstraint(target_ratio=16.0))
    sweep: SweepConfig = field(default_factory=SweepConfig)
    checkpoint: Path | None = None
    search_report: Path | None = None
    policy: tuple[int, ...] | None = None
    output_dir: Path = Path("runs/latest")

    def __post_init__(self) -> None:
        if self.stage is Stage.SEARCH and self.checkpoint is None:
            raise ConfigError("checkpoint", "stage search needs a stage-1 checkpoint")
        if self.stage is Stage.RETRAIN:
            if self.policy is None and self.search_report is None:
                raise ConfigError("policy", "stage retrain needs a policy or a search_report")
        if (
            self.stage in (Stage.RETRAIN, Stage.UNIFORM_SWEEP)
            and self.retrain.mode is TrainMode.FINETUNE
            and self.checkpoint is None
        ):
            raise ConfigError("checkpoint", "finetuning needs a checkpoint to start from")
        if self.retrain.mode is TrainMode.TRAIN:
            raise ConfigError("retrain.mode", "must be retrain or finetune")
        for name in ("checkpoint", "search_report"):
            path = getattr(self, name)
            if path is not None and not path.exists():
                raise ConfigError(name, f"{path} does not exist")

    def to_dict(self) -> dict[str, Any]:
        return _plain(dataclasses.asdict(self))


_SECTIONS: dict[str, type] = {
    "dataset": DatasetConfig,
    "hypernet": HypernetConfig,
    "train": TrainConfig,
    "retrain": TrainConfig,
    "search": SearchConfig,
    "constraint": CompressionConstraint,
    "sweep": SweepConfig,
}
_PATH_KEYS = ("checkpoint", "search_report", "output_dir")


def _plain(value: Any) -> Any:
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, Mapping):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def _tuples(value: Any) -> Any:
    if isinstance(value, list):
        return tuple(_tuples(v) for v in value)
    return value


def _scalar_hint(hint: Any) -> Any:
    """``X | None`` checks as ``X``."""
    args = [arg for arg in typing.get_args(hint) if arg is not type(None)]
    return args[0] if len(args) == 1 and len(typing.get_args(hint)) == 2 else hint


def _check_scalar(name: str, value: Any, hint: Any) -> None:
    if value is None:
        return
    hint = _scalar_hint(hint)
    if hint is int and (isinstance(value, bool) or not isinstance(value, int)):
        raise ConfigError(name, f"expected an integer, got {value!r}")
    if hint is float and (isinstance(value, bool) or not isinstance(value, (int, float))):
        raise ConfigError(name, f"expected a number, got {value!r}")
    if hint is bool and not isinstance(value, bool):
        raise ConfigError(name, f"expected true or false, got {value!r}")
    if hint is str and not isinstance(value, str):
        raise ConfigError(name, f"expected a string, got {value!r}")


def _build_section(section: str, cls: type, data: Any) -> Any:
    if data is None:
        data = {}
    if not isinstance(data, Mapping):
        raise ConfigError(section, f"expected a mapping, got {type(data).__name__}")
    hints = typing.get_type_hints(cls)
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"{section}.{unknown[0]}", f"unknown key (known: {', '.join(sorted(known))})")
    kwargs = {}
    for key, value in data.items():
        _check_scalar(f"{section}.{key}", value, hints[key])
        kwargs[key] = float(value) if _scalar_hint(hints[key]) is float and value is not None else _tuples(value)
    try:
        return cls(**kwargs)
    except ConfigError as exc:
        # module-owned configs name their own section; report the one the user wrote
        leaf = exc.field.rsplit(".", 1)[-1]
        raise ConfigError(f"{section}.{leaf}", exc.message) from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(section, str(exc)) from exc


def apply_overrides(data: dict[str, Any], overrides: Sequence[str]) -> dict[str, Any]:
    """Apply ``--a.b value`` / ``--a.b=value`` pairs; values parse as YAML scalars."""
    items = list(overrides)
    position = 0
    while position < len(items):
        token = items[position]
        if not token.startswith("--"):
            raise ConfigError(token, "overrides must look like --section.key value")
        if "=" in token:
            key, raw = token[2:].split("=", 1)
            position += 1
        else:
            if position + 1 >= len(items):
                raise ConfigError(token[2:], "override is missing a value")
            key, raw = token[2:], items[position + 1]
            position += 2
        try:
            value = yaml.safe_load(raw)
        except yaml.YAMLError as exc:
            raise ConfigError(key, f"cannot parse value {raw!r}") from exc
        node = data
        parts = key.split(".")
        for part in parts[:-1]:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigError(key, f"{part} is not a section")
            node = child
        node[parts[-1]] = value
    return data


def build_run_config(data: Mapping[str, Any], base_dir: Path | None = None) -> RunConfig:
    """Validate a parsed config mapping; relative paths resolve against ``base_dir``."""
    if not isinstance(data, Mapping):
        raise ConfigError("<root>", "config file must hold a mapping")
    known = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(unknown[0], "unknown key")
    if "stage" not in data:
        raise ConfigError("stage", f"missing; expected one of {[s.value for s in Stage]}")
    try:
        stage = Stage(data["stage"])
    except ValueError as exc:
        raise ConfigError("stage", f"expected one of {[s.value for s in Stage]}, got {data['stage']!r}") from exc

    kwargs: dict[str, Any] = {"stage": stage}
    if "target" in data:
        _check_scalar("target", data["target"], str)
        kwargs["target"] = data["target"]
    for section, cls in _SECTIONS.items():
        if section not in data:
            continue
        raw = dict(data[section] or {}) if isinstance(data[section], Mapping) else data[section]
        if section == "retrain" and isinstance(raw, dict):
            raw.setdefault("mode", TrainMode.RETRAIN.value)
        kwargs[section] = _build_section(section, cls, raw)
    if data.get("policy") is not None:
        try:
            kwargs["policy"] = BitwidthPolicy(tuple(data["policy"])).bits
        except (TypeError, ValueError) as exc:
            raise ConfigError("policy", str(exc)) from exc
    for key in _PATH_KEYS:
        if data.get(key) is not None:
            path = Path(str(data[key]))
            if base_dir is not None and not path.is_absolute() and key != "output_dir":
                path = base_dir / path
            kwargs[key] = path
    env_output = os.environ.get(OUTPUT_DIR_ENV)
    if env_output:
        kwargs["output_dir"] = Path(env_output)
    return RunConfig(**kwargs)


def load_config(path: Path, overrides: Sequence[str] = ()) -> RunConfig:
    """Read ``path``, apply dotted ``overrides`` and the environment, and validate."""
    load_dotenv()
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise ConfigError("config", f"{path} is not valid YAML: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("<root>", "config file must hold a mapping")
    return build_run_config(apply_overrides(data, overrides), base_dir=path.parent)


def dump_config(config: RunConfig, path: Path) -> Path:
    """Write the resolved config as YAML (provenance copy)."""
    path.write_text(yaml.safe_dump(config.to_dict(), sort_keys=False), encoding="utf-8")
    return path
