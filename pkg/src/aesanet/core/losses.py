from dataclasses import dataclass, field

import torch
from torch import Tensor

from ..utils.errors import DimensionError, ValidationError

DEFAULT_MARGIN = 0.5  # squared-distance units
DEFAULT_ALPHA = 0.2


@dataclass
class LossBreakdown:
    mse: float
    triplet: float
    total: float
    alpha: float
    valid_triplet_axes: list[str] = field(default_factory=list)


def mse_loss(pred, target) -> Tensor:
    """Mean of squared differences over N paired values."""
    pred = torch.as_tensor(pred)
    target = torch.as_tensor(target, dtype=pred.dtype)
    if pred.shape != target.shape:
        raise DimensionError(f"Prediction shape {tuple(pred.shape)} does not match target shape {tuple(target.shape)}")
    if pred.numel() == 0:
        raise ValidationError("MSE of an empty vector is undefined")
    return ((pred - target) ** 2).mean()


def triplet_loss(z_a, z_p, z_n, margin: float = DEFAULT_MARGIN) -> Tensor:
    """Hinge on squared Euclidean distances: max(|a-p|^2 - |a-n|^2 + margin, 0)."""
    z_a = torch.as_tensor(z_a)
    z_p = torch.as_tensor(z_p, dtype=z_a.dtype)
    z_n = torch.as_tensor(z_n, dtype=z_a.dtype)
    if not (z_a.shape == z_p.shape == z_n.shape):
        raise DimensionError(
            f"Triplet embeddings differ in shape: {tuple(z_a.shape)}, {tuple(z_p.shape)}, {tuple(z_n.shape)}"
        )
    if margin < 0:
        raise ValidationError(f"Margin must be non-negative, got {margin}")

    positive = ((z_a - z_p) ** 2).sum()
    negative = ((z_a - z_n) ** 2).sum()
    return torch.clamp(positive - negative + margin, min=0.0)


def total_loss(mse, triplet, alpha: float = DEFAULT_ALPHA):
    """Weighted objective mse + alpha * triplet (works for floats and tensors)."""
    return mse + alpha * triplet
