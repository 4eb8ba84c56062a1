"""Stage 3: retrain under the searched policy and report test accuracy."""

from __future__ import annotations

import logging
from typing import Any

from ..artifacts import save_checkpoint
from ..policy import BitwidthPolicy, compression_ratio, model_size_bits, size_megabytes
from .common import (
    FINAL_REPORT_NAME,
    RETRAIN_CHECKPOINT_NAME,
    StageContext,
    holdout_accuracy,
    record_json,
    resolve_policy,
    retrain_policy,
)

logger = logging.getLogger(__name__)


def run_retrain_stage(ctx: StageContext, policy: BitwidthPolicy | None = None) -> dict[str, Any]:
    """Retrain under ``policy`` (or the configured one); returns the final report."""
    if policy is None:
        policy = resolve_policy(ctx)
    constraint = ctx.config.constraint
    net, report = retrain_policy(ctx, policy)
    ctx.store.add(
        "retrain",
        save_checkpoint(
            net, ctx.path(RETRAIN_CHECKPOINT_NAME), final_loss=report.final_loss, loss_policy=report.loss_policy
        ),
    )
    size_bits = model_size_bits(policy.bits, ctx.spec, constraint)
    final = {
        "target": ctx.spec.name,
        "policy": list(policy.bits),
        "mode": ctx.config.retrain.mode.value,
        "ratio": compression_ratio(policy.bits, ctx.spec, constraint),
        "target_ratio": constraint.target_ratio,
        "size_bits": size_bits,
        "size_mb": size_megabytes(size_bits),
        "test_accuracy": holdout_accuracy(ctx, net, policy),
        "epochs": len(report.rows),
        "initial_loss": report.initial_loss,
        "final_loss": report.final_loss,
    }
    logger.info("Retrained %s: test accuracy %.4f at %.3fx", policy, final["test_accuracy"], final["ratio"])
    record_json(ctx, "retrain", FINAL_REPORT_NAME, final)
    return final
