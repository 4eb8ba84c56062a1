"""Uniform-bitwidth baselines: retrain each uniform policy and tabulate accuracy against ratio."""

from __future__ import annotations

import logging

from ..artifacts import write_csv
from ..policy import BitwidthPolicy, compression_ratio
from .common import SWEEP_CSV_NAME, StageContext, holdout_accuracy, retrain_policy

logger = logging.getLogger(__name__)

SWEEP_HEADER = ("bits", "ratio", "accuracy")


def run_sweep_stage(ctx: StageContext) -> list[tuple[str, float, float]]:
    sweep = ctx.config.sweep
    layers = ctx.spec.layer_count
    rows: list[tuple[str, float, float]] = []
    if sweep.float_baseline:
        policy = BitwidthPolicy.uniform(max(sweep.bits), layers)
        net, _ = retrain_policy(ctx, policy, quantize=False)
        rows.append(("float", 1.0, holdout_accuracy(ctx, net, policy)))
        logger.info("float baseline: accuracy %.4f", rows[-1][2])
    for q in sweep.bits:
        policy = BitwidthPolicy.uniform(q, layers)
        net, _ = retrain_policy(ctx, policy)
        ratio = compression_ratio(policy.bits, ctx.spec, ctx.config.constraint)
        rows.append((str(q), ratio, holdout_accuracy(ctx, net, policy)))
        logger.info("uniform %d-bit: ratio %.3fx accuracy %.4f", q, rows[-1][1], rows[-1][2])
    ctx.store.add("uniform-sweep", write_csv(ctx.path(SWEEP_CSV_NAME), SWEEP_HEADER, rows))
    return rows
