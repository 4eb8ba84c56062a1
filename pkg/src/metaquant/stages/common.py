"""Shared plumbing for the pipeline stages."""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from pathlib import Path

from ..artifacts import load_checkpoint, restore_net, write_json
from ..config import RunConfig
from ..datasets import Dataset
from ..errors import ConfigError, PolicyError
from ..hypernet import MetaQuantNet
from ..policy import BitwidthPolicy, SearchReport, evaluate_policy
from ..target_net import TargetNetSpec, get_spec
from ..telemetry import RunStore
from ..trainer import TrainMode, TrainReport, run_training

logger = logging.getLogger(__name__)

CHECKPOINT_NAME = "metaquant.ckpt"
TRAIN_CSV_NAME = "train.csv"
SEARCH_JSON_NAME = "search.json"
BITWIDTH_CSV_NAME = "bitwidths.csv"
RETRAIN_CHECKPOINT_NAME = "retrain.ckpt"
FINAL_REPORT_NAME = "final_report.json"
SWEEP_CSV_NAME = "uniform_sweep.csv"
RESOLVED_CONFIG_NAME = "resolved_config.yaml"


@dataclass
class StageContext:
    """Everything a stage needs: the resolved config, the data, the target and the artifact ledger."""

    config: RunConfig
    dataset: Dataset
    spec: TargetNetSpec
    store: RunStore

    @classmethod
    def create(cls, config: RunConfig, store: RunStore) -> StageContext:
        dataset = config.dataset.build()
        spec = get_spec(config.target, class_count=dataset.class_count, image_size=dataset.sample_shape[-1])
        logger.info(
            "Dataset %s: %d samples, %d classes; target %s with %d layers",
            dataset.name, len(dataset), dataset.class_count, spec.name, spec.layer_count,
        )
        return cls(config=config, dataset=dataset, spec=spec, store=store)

    def path(self, name: str) -> Path:
        return self.config.output_dir / name


def fresh_net(ctx: StageContext, bit_range: tuple[int, int], quantize: bool = True) -> MetaQuantNet:
    hyper = ctx.config.hypernet
    return MetaQuantNet(
        ctx.spec, hidden=hyper.hidden, ste_clip=hyper.ste_clip, bit_range=bit_range, seed=hyper.seed, quantize=quantize
    )


def checkpoint_net(ctx: StageContext, path: Path | None) -> MetaQuantNet:
    """Load the checkpoint at ``path`` and check it was built for ``ctx.spec``."""
    if path is None:
        raise ConfigError("checkpoint", f"stage {ctx.config.stage.value} needs a checkpoint")
    if not path.exists():
        raise ConfigError("checkpoint", f"{path} does not exist")
    net = restore_net(load_checkpoint(path))
    if net.spec != ctx.spec:
        raise ConfigError("target", f"checkpoint {path} holds {net.spec.name}, config targets {ctx.spec.name}")
    return net


def resolve_policy(ctx: StageContext) -> BitwidthPolicy:
    config = ctx.config
    if config.policy is not None:
        policy = BitwidthPolicy(config.policy)
    else:
        assert config.search_report is not None
        policy = SearchReport.from_json(config.search_report.read_text(encoding="utf-8")).best_policy
    return policy.check(ctx.spec.layer_count)


def retrain_policy(
    ctx: StageContext, policy: BitwidthPolicy, quantize: bool = True
) -> tuple[MetaQuantNet, TrainReport]:
    """Stage 3: retrain from scratch (default) or finetune the checkpoint under ``policy``."""
    train_cfg = replace(ctx.config.retrain, policy=policy.bits, quantize=quantize)
    if train_cfg.mode is TrainMode.FINETUNE:
        source = ctx.config.checkpoint if ctx.config.checkpoint is not None else ctx.path(CHECKPOINT_NAME)
        net = checkpoint_net(ctx, source)
        net.quantize = quantize
    else:
        low, high = train_cfg.bit_range
        net = fresh_net(ctx, (min(low, *policy.bits), max(high, *policy.bits)), quantize=quantize)
    try:
        policy.check(ctx.spec.layer_count, net.bit_range)
    except PolicyError as exc:
        raise ConfigError("policy", str(exc)) from exc
    report = run_training(net, ctx.spec, ctx.dataset, train_cfg)
    return net, report


def holdout_accuracy(ctx: StageContext, net: MetaQuantNet, policy: BitwidthPolicy) -> float:
    return evaluate_policy(net, ctx.spec, policy.bits, ctx.dataset.split("test"))


def record_json(ctx: StageContext, stage: str, name: str, data: object) -> Path:
    return ctx.store.add(stage, write_json(ctx.path(name), data))
