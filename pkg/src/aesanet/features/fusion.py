from dataclasses import dataclass

import numpy as np
import torch

from ..utils.errors import DimensionError
from .stack_io import LayerStack


def softmax_weights(raw_scalars: torch.Tensor) -> torch.Tensor:
    """Normalize learnable layer scalars into strictly positive weights summing to one."""
    return torch.softmax(raw_scalars, dim=0)


def fuse_layers(stack: torch.Tensor | np.ndarray | LayerStack, raw_scalars: torch.Tensor | np.ndarray) -> torch.Tensor:
    """
    Softmax-weighted sum over the layer axis of an L x T x D stack.

    Args:
        stack: Layer stack values (L x T x D)
        raw_scalars: Pre-softmax layer scalars (length L)

    Returns:
        Fused T x D feature sequence
    """
    if isinstance(stack, LayerStack):
        stack = stack.values
    values = torch.as_tensor(stack)
    raw = torch.as_tensor(raw_scalars)

    if values.dim() != 3:
        raise DimensionError(f"Expected an L x T x D stack, got shape {tuple(values.shape)}")
    if raw.dim() != 1 or raw.shape[0] != values.shape[0]:
        raise DimensionError(f"Stack has {values.shape[0]} layers but {raw.numel()} fusion scalars were given")

    weights = softmax_weights(raw.to(values.dtype))
    return torch.einsum("l,ltd->td", weights, values)


@dataclass
class FusionWeights:
    """Learnable pre-softmax layer scalars."""
    raw_scalars: torch.Tensor

    @classmethod
    def uniform(cls, num_layers: int) -> "FusionWeights":
        return cls(raw_scalars=torch.zeros(num_layers))

    @property
    def num_layers(self) -> int:
        return self.raw_scalars.numel()

    def normalized(self) -> torch.Tensor:
        return softmax_weights(self.raw_scalars)

    def fuse(self, stack: torch.Tensor | np.ndarray | LayerStack) -> torch.Tensor:
        return fuse_layers(stack, self.raw_scalars)
