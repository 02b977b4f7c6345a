from dataclasses import dataclass

import numpy as np
import torch
from scipy.spatial.distance import pdist

from ..core.model import AESANet
from ..data.manifest import TrainingSample
from ..utils.errors import ValidationError


@dataclass(frozen=True)
class EmbeddingGap:
    near_mean: float   # mean distance of pairs with |dy| < epsilon
    far_mean: float    # mean distance of pairs with |dy| > epsilon
    near_pairs: int
    far_pairs: int

    @property
    def gap(self) -> float:
        return self.far_mean - self.near_mean


def collect_embeddings(model: AESANet, samples: list[TrainingSample]) -> tuple[np.ndarray, np.ndarray]:
    """Evaluation-mode shared embeddings (N x C) and normalized targets (N x 4)."""
    was_training = model.training
    model.eval()
    try:
        with torch.no_grad():
            embeddings = np.stack([model(sample.stack).embedding.double().numpy() for sample in samples])
    finally:
        model.train(was_training)
    targets = np.stack([np.asarray(sample.targets, dtype=np.float64) for sample in samples])
    return embeddings, targets


def embedding_gap(embeddings: np.ndarray, scores: np.ndarray, epsilon: float) -> EmbeddingGap:
    """Compare Euclidean distances of score-near and score-far clip pairs."""
    embeddings = np.asarray(embeddings, dtype=np.float64)
    scores = np.asarray(scores, dtype=np.float64).reshape(-1, 1)
    if embeddings.shape[0] != scores.shape[0] or embeddings.shape[0] < 2:
        raise ValidationError("Need at least two embeddings with one score each")

    distances = pdist(embeddings)
    score_gaps = pdist(scores, metric="cityblock")
    near = distances[score_gaps < epsilon]
    far = distances[score_gaps > epsilon]
    if near.size == 0 or far.size == 0:
        raise ValidationError(f"No {'near' if near.size == 0 else 'far'} pairs at epsilon={epsilon}")

    return EmbeddingGap(
        near_mean=float(near.mean()),
        far_mean=float(far.mean()),
        near_pairs=int(near.size),
        far_pairs=int(far.size),
    )
