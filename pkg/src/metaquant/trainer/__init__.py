"""Stage-1 meta-training and stage-3 retraining."""

from .loop import (
    EpochRecord,
    TrainConfig,
    TrainMode,
    TrainReport,
    evaluate_loss,
    run_training,
    sample_policy,
    train_step,
)
from .optim import SGD, global_grad_norm, learning_rate

__all__ = [
    "EpochRecord",
    "SGD",
    "TrainConfig",
    "TrainMode",
    "TrainReport",
    "evaluate_loss",
    "global_grad_norm",
    "learning_rate",
    "run_training",
    "sample_policy",
    "train_step",
]
