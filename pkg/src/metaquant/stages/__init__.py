"""The three pipeline stages and the uniform baseline sweep."""

from __future__ import annotations

import logging

from ..config import RunConfig, Stage
from ..telemetry import RunStore
from .common import StageContext
from .retrain import run_retrain_stage
from .search import run_search_stage
from .sweep import run_sweep_stage
from .train import run_train_stage

logger = logging.getLogger(__name__)


def run_stage(config: RunConfig, store: RunStore) -> None:
    """Run ``config.stage`` (``full-pipeline`` chains train, search and retrain)."""
    ctx = StageContext.create(config, store)
    stage = config.stage
    logger.info("Running stage %s into %s", stage.value, config.output_dir)
    if stage is Stage.TRAIN:
        run_train_stage(ctx)
    elif stage is Stage.SEARCH:
        run_search_stage(ctx)
    elif stage is Stage.RETRAIN:
        run_retrain_stage(ctx)
    elif stage is Stage.UNIFORM_SWEEP:
        run_sweep_stage(ctx)
    else:
        net, _ = run_train_stage(ctx)
        report = run_search_stage(ctx, net)
        run_retrain_stage(ctx, report.best_policy)


__all__ = [
    "StageContext",
    "run_retrain_stage",
    "run_search_stage",
    "run_stage",
    "run_sweep_stage",
    "run_train_stage",
]
