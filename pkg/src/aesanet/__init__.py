"""
AESA-Net - multi-axis audio aesthetics prediction

Scores speech, music and general audio clips on four perceptual axes
(production quality, production complexity, content enjoyment, content
usefulness) from frozen self-supervised frontend features.
"""

from .core import (
    AESANet,
    EarlyStopping,
    MemoryBuffer,
    ModelConfig,
    TrainConfig,
    fit,
    forward,
    init_params,
    load_checkpoint,
    mse_loss,
    save_checkpoint,
    train_step,
    triplet_loss,
)
from .data import ScoreScale, parse_manifest, split_train_val
from .evaluation import compute_report, ktau, pcc, render_report, srcc
from .features import LayerStack, fuse_layers, resample, synthetic_frontend
from .utils import AXES, DOMAINS

__version__ = "0.1.0"
__all__ = [
    "AESANet",
    "AXES",
    "DOMAINS",
    "EarlyStopping",
    "LayerStack",
    "MemoryBuffer",
    "ModelConfig",
    "ScoreScale",
    "TrainConfig",
    "compute_report",
    "fit",
    "forward",
    "fuse_layers",
    "init_params",
    "ktau",
    "load_checkpoint",
    "mse_loss",
    "parse_manifest",
    "pcc",
    "render_report",
    "resample",
    "save_checkpoint",
    "split_train_val",
    "srcc",
    "synthetic_frontend",
    "train_step",
    "triplet_loss",
]
