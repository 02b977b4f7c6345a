import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
import torch
import torch.nn.functional as F
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, model_validator
from torch import Tensor, nn

from ..features.fusion import fuse_layers, softmax_weights
from ..features.stack_io import LayerStack
from ..utils.config import AXES
from ..utils.errors import ConfigError, NumericError, ShapeError

# Queries are attended in blocks of this many frames so that memory stays
# linear in sequence length at inference time.
ATTENTION_CHUNK = 1024


class ModelConfig(BaseModel):
    """Architecture hyperparameters of AESA-Net."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    input_dim: int = Field(gt=0)
    num_layers: int = Field(default=1, gt=0)
    adapter_dim: int = Field(default=256, gt=0)
    lstm_hidden: int = Field(default=128, gt=0)
    shared_dim: int = Field(default=128, gt=0)
    attention_heads: int = Field(default=4, gt=0)
    dropout_rate: float = Field(default=0.3, ge=0.0, lt=1.0)
    activation: Literal["relu"] = "relu"
    axes: tuple[str, ...] = AXES

    @model_validator(mode="after")
    def _check_heads(self) -> "ModelConfig":
        if self.shared_dim % self.attention_heads != 0:
            raise ValueError(
                f"shared_dim ({self.shared_dim}) must be divisible by attention_heads ({self.attention_heads})"
            )
        if tuple(self.axes) != AXES:
            raise ValueError(f"axes must be {AXES}")
        return self


@dataclass
class ForwardOutput:
    clip_scores: Tensor   # (4,) in (0, 1)
    frame_scores: Tensor  # (4, T) in (0, 1)
    embedding: Tensor     # (shared_dim,) time-average of the shared layer


def seeded_dropout(x: Tensor, p: float, training: bool, generator: torch.Generator | None) -> Tensor:
    """Inverted dropout whose mask is drawn from an explicit generator."""
    if not training or p == 0.0:
        return x
    keep = torch.full_like(x, 1.0 - p)
    mask = torch.bernoulli(keep, generator=generator)
    return x * mask / (1.0 - p)


class SelfAttention(nn.Module):
    """Multi-head self-attention over a (1, T, C) sequence."""

    def __init__(self, dim: int, heads: int):
        super().__init__()
        self.heads = heads
        self.head_dim = dim // heads
        self.in_proj = nn.Linear(dim, 3 * dim)
        self.out_proj = nn.Linear(dim, dim)

    def forward(self, x: Tensor) -> Tensor:
        batch, frames, dim = x.shape
        q, k, v = self.in_proj(x).chunk(3, dim=-1)
        # (B, heads, T, head_dim)
        q, k, v = (t.view(batch, frames, self.heads, self.head_dim).transpose(1, 2) for t in (q, k, v))

        blocks = [
            F.scaled_dot_product_attention(q[:, :, start:start + ATTENTION_CHUNK], k, v)
            for start in range(0, frames, ATTENTION_CHUNK)
        ]
        attended = torch.cat(blocks, dim=2).transpose(1, 2).reshape(batch, frames, dim)
        return self.out_proj(attended)


class AxisHead(nn.Module):
    """Attention, frame-level sigmoid scoring and average pooling for one axis."""

    def __init__(self, dim: int, heads: int):
        super().__init__()
        self.attention = SelfAttention(dim, heads)
        self.norm = nn.LayerNorm(dim)
        self.scorer = nn.Linear(dim, 1)

    def forward(self, shared: Tensor) -> tuple[Tensor, Tensor]:
        hidden = self.norm(shared + self.attention(shared))
        frame_scores = torch.sigmoid(self.scorer(hidden)).squeeze(-1)         # (1, T)
        clip_score = F.adaptive_avg_pool1d(frame_scores.unsqueeze(1), 1)      # (1, 1, 1)
        return frame_scores.squeeze(0), clip_score.reshape(())


class AESANet(nn.Module):
    """
    Layer fusion -> adapter -> 2-layer BLSTM -> shared linear (dropout, ReLU)
    -> four axis heads.

    Parameters are registered in a fixed order (fusion, adapter, blstm,
    shared, heads PQ/PC/CE/CU); checkpoints rely on that order.
    """

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        self.fusion = nn.Parameter(torch.zeros(config.num_layers))
        self.adapter = nn.Linear(config.input_dim, config.adapter_dim)
        self.blstm = nn.LSTM(
            input_size=config.adapter_dim,
            hidden_size=config.lstm_hidden,
            num_layers=2,
            bidirectional=True,
            batch_first=True,
        )
        self.shared = nn.Linear(2 * config.lstm_hidden, config.shared_dim)
        self.heads = nn.ModuleList(
            AxisHead(config.shared_dim, config.attention_heads) for _ in config.axes
        )

    def fusion_weights(self) -> Tensor:
        return softmax_weights(self.fusion)

    def validate_input(self, features: Tensor | np.ndarray | LayerStack) -> Tensor:
        """Coerce features to an L x T x D tensor matching the config, or raise."""
        if isinstance(features, LayerStack):
            features = features.values
        values = torch.as_tensor(features)
        if values.dim() == 2:
            if self.config.num_layers != 1:
                raise ShapeError(
                    f"A T x D sequence was given but the model fuses {self.config.num_layers} layers"
                )
            values = values.unsqueeze(0)
        if values.dim() != 3:
            raise ShapeError(f"Expected L x T x D features, got shape {tuple(values.shape)}")

        num_layers, num_frames, dim = values.shape
        if num_layers != self.config.num_layers or dim != self.config.input_dim:
            raise ShapeError(
                f"Features have L={num_layers}, D={dim}; model expects "
                f"L={self.config.num_layers}, D={self.config.input_dim}"
            )
        if num_frames < 1:
            raise ShapeError("Features must contain at least one frame")
        if not torch.isfinite(values).all():
            raise NumericError("Features contain non-finite values")
        return values.to(self.fusion.dtype)

    def forward(self, features: Tensor | np.ndarray | LayerStack,
                generator: torch.Generator | None = None) -> ForwardOutput:
        stack = self.validate_input(features)

        fused = fuse_layers(stack, self.fusion).unsqueeze(0)           # (1, T, D)
        adapted = self.adapter(fused)
        recurrent, _ = self.blstm(adapted)                             # (1, T, 2H)
        shared = self.shared(recurrent)
        shared = torch.relu(seeded_dropout(shared, self.config.dropout_rate, self.training, generator))

        per_axis = [head(shared) for head in self.heads]
        frame_scores = torch.stack([frames for frames, _ in per_axis])
        clip_scores = torch.stack([clip for _, clip in per_axis])
        embedding = shared.mean(dim=1).squeeze(0)

        return ForwardOutput(clip_scores=clip_scores, frame_scores=frame_scores, embedding=embedding)


def init_params(config: ModelConfig, seed: int) -> AESANet:
    """
    Build a model with deterministic weights.

    Every weight matrix is drawn from U(-1/sqrt(fan_in), 1/sqrt(fan_in)); biases
    are zero, layer-norm gains one, and the fusion scalars zero (uniform
    layer weights).
    """
    if not isinstance(config, ModelConfig):
        raise ConfigError(f"Expected ModelConfig, got {type(config).__name__}")

    model = AESANet(config)
    generator = torch.Generator().manual_seed(seed)

    with torch.no_grad():
        for name, param in model.named_parameters():
            if name == "fusion":
                param.zero_()
            elif name.endswith("norm.weight"):
                param.fill_(1.0)
            elif param.dim() >= 2:
                bound = 1.0 / math.sqrt(param.shape[1])
                param.copy_(torch.rand(param.shape, generator=generator) * 2 * bound - bound)
            else:
                param.zero_()

    num_params = sum(p.numel() for p in model.parameters())
    logger.debug(f"Initialized AESA-Net with {num_params} parameters (seed {seed})")
    return model


def forward(params: AESANet, features: Tensor | np.ndarray | LayerStack,
            train_mode: bool = False, seed: int = 0) -> ForwardOutput:
    """Run one forward pass; in train mode dropout masks come from `seed`."""
    generator = torch.Generator().manual_seed(seed) if train_mode else None
    was_training = params.training
    params.train(train_mode)
    try:
        return params(features, generator=generator)
    finally:
        params.train(was_training)
