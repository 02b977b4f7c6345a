from collections import deque
from dataclasses import dataclass

import numpy as np
import torch
from torch import Tensor

from ..utils.errors import DimensionError, NumericError, ValidationError

DEFAULT_CAPACITY = 256
DEFAULT_EPSILON = 0.1


@dataclass(frozen=True)
class BufferEntry:
    z: Tensor
    y: float
    step: int


class MemoryBuffer:
    """
    Fixed-capacity FIFO of frozen (embedding, normalized score) pairs for one axis.

    Stored embeddings are detached copies, so a mined triplet only carries
    gradient through its anchor.
    """

    def __init__(self, capacity: int = DEFAULT_CAPACITY, axis: str = ""):
        if capacity < 1:
            raise ValidationError(f"Buffer capacity must be positive, got {capacity}")
        self.capacity = capacity
        self.axis = axis
        self.entries: deque[BufferEntry] = deque(maxlen=capacity)
        self._step = 0

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def dim(self) -> int | None:
        return self.entries[0].z.numel() if self.entries else None

    def push(self, z, y: float):
        """Append (z, y); when full the single oldest entry is evicted."""
        z = torch.as_tensor(z).detach().clone().reshape(-1)
        if self.dim is not None and z.numel() != self.dim:
            raise DimensionError(f"Buffer {self.axis} holds {self.dim}-dim embeddings, got {z.numel()}")
        if not torch.isfinite(z).all():
            raise NumericError(f"Refusing to buffer a non-finite embedding for axis {self.axis}")
        y = float(y)
        if not 0.0 <= y <= 1.0:
            raise ValidationError(f"Buffered scores must be normalized to [0, 1], got {y}")

        self.entries.append(BufferEntry(z=z, y=y, step=self._step))
        self._step += 1

    def sample_triplet(self, y_a: float, epsilon: float = DEFAULT_EPSILON,
                       rng: np.random.Generator | int | None = None) -> tuple[Tensor, Tensor] | None:
        """
        Mine one positive and one negative for an anchor score.

        Args:
            y_a: Anchor score (normalized)
            epsilon: Threshold; positives satisfy |y_a - y| < epsilon, negatives |y_a - y| > epsilon
            rng: Generator or seed for the uniform choice

        Returns:
            (z_p, z_n), or None when either candidate set is empty
        """
        if not 0.0 < epsilon < 1.0:
            raise ValidationError(f"epsilon must lie in (0, 1), got {epsilon}")

        positives = [entry for entry in self.entries if abs(y_a - entry.y) < epsilon]
        negatives = [entry for entry in self.entries if abs(y_a - entry.y) > epsilon]
        if not positives or not negatives:
            return None

        rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
        positive = positives[rng.integers(len(positives))]
        negative = negatives[rng.integers(len(negatives))]
        return positive.z, negative.z

    def snapshot(self) -> list[tuple[float, int]]:
        """(score, step) of every entry, oldest first."""
        return [(entry.y, entry.step) for entry in self.entries]
