"""Model, losses, triplet memory buffers and the training loop."""

from .buffer import BufferEntry, MemoryBuffer
from .checkpoint import load_checkpoint, save_checkpoint
from .losses import LossBreakdown, mse_loss, total_loss, triplet_loss
from .model import AESANet, ForwardOutput, ModelConfig, forward, init_params
from .training import (
    AdamMoments,
    EarlyStopping,
    EpochRecord,
    FitResult,
    TrainConfig,
    TrainState,
    adam_update,
    fit,
    train_epoch,
    train_step,
    validation_mse,
)

__all__ = [
    "AESANet",
    "AdamMoments",
    "BufferEntry",
    "EarlyStopping",
    "EpochRecord",
    "FitResult",
    "ForwardOutput",
    "LossBreakdown",
    "MemoryBuffer",
    "ModelConfig",
    "TrainConfig",
    "TrainState",
    "adam_update",
    "fit",
    "forward",
    "init_params",
    "load_checkpoint",
    "mse_loss",
    "save_checkpoint",
    "total_loss",
    "train_epoch",
    "train_step",
    "triplet_loss",
    "validation_mse",
]
