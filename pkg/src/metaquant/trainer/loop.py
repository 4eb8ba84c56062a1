"""Meta-training (random policies) and retraining/finetuning (fixed policy)."""

from __future__ import annotations

import csv
import io
import logging
import math
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from ..constants import (
    DEFAULT_BATCH_SIZE,
    DEFAULT_EPOCHS,
    DEFAULT_GRAD_CLIP,
    DEFAULT_HALVE_EVERY,
    DEFAULT_LR,
    DEFAULT_MOMENTUM,
    DEFAULT_WARM_EPOCHS,
    DEFAULT_WEIGHT_DECAY,
    MAX_BITWIDTH,
    MIN_BITWIDTH,
)
from ..datasets import Dataset, DataSplit
from ..errors import ConfigError, DivergenceError, NumericalError
from ..hypernet import MetaQuantNet, predict_logits
from ..numerics import ComputationTape, Tensor, softmax_cross_entropy
from ..policy import BitwidthPolicy, evaluate_policy, validate_bit_range
from ..target_net import TargetNetSpec
from .optim import SGD, learning_rate

logger = logging.getLogger(__name__)


class TrainMode(str, Enum):
    TRAIN = "train"
    RETRAIN = "retrain"
    FINETUNE = "finetune"


@dataclass(frozen=True)
class TrainConfig:
    """Optimizer, schedule and policy settings for one training run.

    ``policy`` must be set before retrain/finetune runs.  ``quantize=False`` trains
    the full-precision baseline.
    """

    epochs: int = DEFAULT_EPOCHS
    batch_size: int = DEFAULT_BATCH_SIZE
    lr_initial: float = DEFAULT_LR
    momentum: float = DEFAULT_MOMENTUM
    weight_decay: float = DEFAULT_WEIGHT_DECAY
    grad_clip: float | None = DEFAULT_GRAD_CLIP
    warm_epochs: int = DEFAULT_WARM_EPOCHS
    halve_every: int = DEFAULT_HALVE_EVERY
    bit_range: tuple[int, int] = (MIN_BITWIDTH, MAX_BITWIDTH)
    seed: int = 0
    mode: TrainMode = TrainMode.TRAIN
    policy: tuple[int, ...] | None = None
    quantize: bool = True
    probe_policies: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", TrainMode(self.mode))
        object.__setattr__(self, "bit_range", validate_bit_range(self.bit_range, "train.bit_range"))
        if self.epochs < 0:
            raise ConfigError("train.epochs", "must be non-negative")
        if self.batch_size < 1:
            raise ConfigError("train.batch_size", "must be positive")
        if self.lr_initial < 0:
            raise ConfigError("train.lr_initial", "must be non-negative")
        if not 0 <= self.momentum < 1:
            raise ConfigError("train.momentum", "must lie in [0, 1)")
        if self.weight_decay < 0:
            raise ConfigError("train.weight_decay", "must be non-negative")
        if self.grad_clip is not None and not self.grad_clip > 0:
            raise ConfigError("train.grad_clip", "must be positive or null")
        if self.warm_epochs < 0 or self.halve_every < 1:
            raise ConfigError("train.lr_schedule", "warm_epochs >= 0 and halve_every >= 1 required")
        if self.policy is not None:
            object.__setattr__(self, "policy", BitwidthPolicy(tuple(self.policy)).bits)
        object.__setattr__(self, "probe_policies", tuple(tuple(p) for p in self.probe_policies))

    def lr_at(self, epoch: int) -> float:
        return learning_rate(epoch, self.lr_initial, self.warm_epochs, self.halve_every)

    def default_probes(self, layers: int) -> tuple[tuple[int, ...], ...]:
        if self.probe_policies:
            return self.probe_policies
        low, high = self.bit_range
        probes = [(high,) * layers, (low,) * layers]
        if self.policy is not None:
            probes.insert(0, self.policy)
        return tuple(dict.fromkeys(probes))

    def loss_policy(self, layers: int) -> tuple[int, ...]:
        """Policy under which initial/final training loss is reported."""
        return self.policy if self.policy is not None else (self.bit_range[1],) * layers


@dataclass
class EpochRecord:
    epoch: int
    lr: float
    loss: float
    probe_accuracy: dict[str, float]
    seconds: float


@dataclass
class TrainReport:
    """Per-epoch losses and probe accuracies."""

    rows: list[EpochRecord] = field(default_factory=list)
    initial_loss: float | None = None
    final_loss: float | None = None
    loss_policy: tuple[int, ...] | None = None

    @property
    def losses(self) -> list[float]:
        return [row.loss for row in self.rows]

    def to_csv(self, include_timing: bool = True) -> str:
        probes = list(self.rows[0].probe_accuracy) if self.rows else []
        header = ["epoch", "lr", "loss", *(f"acc[{p}]" for p in probes)]
        if include_timing:
            header.append("seconds")
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(header)
        for row in self.rows:
            values = [row.epoch, repr(row.lr), repr(row.loss), *(repr(row.probe_accuracy[p]) for p in probes)]
            if include_timing:
                values.append(f"{row.seconds:.3f}")
            writer.writerow(values)
        return buffer.getvalue()

    def write_csv(self, path: Path) -> Path:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_csv(), encoding="utf-8")
        return path


def sample_policy(layers: int, bit_range: tuple[int, int], rng: np.random.Generator) -> BitwidthPolicy:
    """Each bitwidth drawn i.i.d. uniformly from the inclusive ``bit_range``."""
    low, high = validate_bit_range(bit_range)
    return BitwidthPolicy(tuple(int(q) for q in rng.integers(low, high + 1, size=layers)))


def train_step(
    net: MetaQuantNet,
    spec: TargetNetSpec,
    batch: np.ndarray,
    labels: np.ndarray,
    policy: BitwidthPolicy | tuple[int, ...],
    optimizer: SGD,
) -> float:
    """One forward/backward/update; returns the minibatch loss before the update."""
    optimizer.zero_grad()
    try:
        with ComputationTape() as tape:
            logits = predict_logits(net, policy, Tensor(batch))
            loss = softmax_cross_entropy(logits, labels)
        value = loss.item()
        if not math.isfinite(value):
            raise NumericalError(f"loss is {value}")
        tape.backward(loss)
    except NumericalError as exc:
        raise DivergenceError(epoch=-1, step=-1) from exc
    optimizer.step()
    return value


def evaluate_loss(net: MetaQuantNet, policy: tuple[int, ...], split: DataSplit, batch_size: int) -> float:
    """Mean cross-entropy over ``split`` (no gradient recording)."""
    total = 0.0
    for features, labels in split.batches(batch_size):
        logits = predict_logits(net, policy, Tensor(features))
        total += softmax_cross_entropy(logits, labels).item() * len(labels)
    return total / max(len(split), 1)


def run_training(net: MetaQuantNet, spec: TargetNetSpec, dataset: Dataset, config: TrainConfig) -> TrainReport:
    """Train ``net`` in place and return the per-epoch report.

    ``mode=train`` samples a fresh policy per minibatch; retrain/finetune
    use ``config.policy`` for every batch.  Minibatch order for epoch ``e``
    comes from the stream seeded by ``(seed, e)``.
    """
    layers = spec.layer_count
    if config.mode is not TrainMode.TRAIN and config.policy is None:
        raise ConfigError("train.policy", f"mode {config.mode.value} needs a fixed policy")
    if config.policy is not None:
        BitwidthPolicy(config.policy).check(layers)
    report = TrainReport(loss_policy=config.loss_policy(layers))
    if config.epochs == 0:
        return report
    net.quantize = config.quantize

    train = dataset.split("train")
    val = dataset.split("val")
    net_low, net_high = net.bit_range
    probes = tuple(p for p in config.default_probes(layers) if all(net_low <= q <= net_high for q in p))
    policy_rng = np.random.default_rng([config.seed, 1])
    optimizer = SGD(
        net.parameters(),
        lr=config.lr_at(0),
        momentum=config.momentum,
        weight_decay=config.weight_decay,
        grad_clip=config.grad_clip,
    )
    report.initial_loss = evaluate_loss(net, config.loss_policy(layers), train, config.batch_size)
    logger.info(
        "Training %s (%s, %d epochs, quantize=%s), initial loss %.4f",
        spec.name, config.mode.value, config.epochs, config.quantize, report.initial_loss,
    )

    for epoch in range(config.epochs):
        started = time.perf_counter()
        optimizer.lr = config.lr_at(epoch)
        epoch_rng = np.random.default_rng([config.seed, 0, epoch])
        losses = []
        for step, (features, labels) in enumerate(train.batches(config.batch_size, epoch_rng)):
            if config.mode is TrainMode.TRAIN:
                policy = sample_policy(layers, config.bit_range, policy_rng).bits
            else:
                assert config.policy is not None
                policy = config.policy
            try:
                losses.append(train_step(net, spec, features, labels, policy, optimizer))
            except DivergenceError as exc:
                raise DivergenceError(epoch=epoch, step=step, report=report) from exc
            logger.debug(
                "epoch %d step %d policy %s loss %.5f grad norm %.4g",
                epoch, step, policy, losses[-1], optimizer.last_grad_norm,
            )
        accuracy = {
            "-".join(map(str, p)): evaluate_policy(net, spec, p, val) for p in probes
        }
        row = EpochRecord(
            epoch=epoch,
            lr=optimizer.lr,
            loss=float(np.mean(losses)) if losses else float("nan"),
            probe_accuracy=accuracy,
            seconds=time.perf_counter() - started,
        )
        report.rows.append(row)
        logger.info(
            "epoch %d lr %.4g loss %.4f %s",
            epoch, row.lr, row.loss, " ".join(f"acc[{k}]={v:.3f}" for k, v in accuracy.items()),
        )

    report.final_loss = evaluate_loss(net, config.loss_policy(layers), train, config.batch_size)
    return report
