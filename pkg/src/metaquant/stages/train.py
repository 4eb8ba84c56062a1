"""Stage 1: meta-train the hypernetwork under random policies."""

from __future__ import annotations

from ..artifacts import save_checkpoint
from ..errors import DivergenceError
from ..hypernet import MetaQuantNet
from ..trainer import TrainReport, run_training
from .common import CHECKPOINT_NAME, TRAIN_CSV_NAME, StageContext, fresh_net


def run_train_stage(ctx: StageContext) -> tuple[MetaQuantNet, TrainReport]:
    train_cfg = ctx.config.train
    net = fresh_net(ctx, train_cfg.bit_range, quantize=train_cfg.quantize)
    try:
        report = run_training(net, ctx.spec, ctx.dataset, train_cfg)
    except DivergenceError as exc:
        if isinstance(exc.report, TrainReport):
            ctx.store.add("train", exc.report.write_csv(ctx.path(TRAIN_CSV_NAME)), {"partial": True})
        raise
    ctx.store.add("train", report.write_csv(ctx.path(TRAIN_CSV_NAME)), {"epochs": len(report.rows)})
    checkpoint = save_checkpoint(
        net, ctx.path(CHECKPOINT_NAME), final_loss=report.final_loss, loss_policy=report.loss_policy
    )
    ctx.store.add("train", checkpoint, {"parameters": net.parameter_count})
    return net, report
