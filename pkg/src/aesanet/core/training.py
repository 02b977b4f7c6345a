import copy
import json
import math
import time
from collections.abc import Callable
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import torch
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field
from torch import Tensor

from ..data.manifest import ScoreScale, TrainingSample
from ..utils.config import AXES
from ..utils.errors import NumericError, ShapeError, ValidationError
from ..utils.helpers import format_duration
from .buffer import DEFAULT_CAPACITY, DEFAULT_EPSILON, MemoryBuffer
from .losses import DEFAULT_ALPHA, DEFAULT_MARGIN, LossBreakdown, mse_loss, total_loss, triplet_loss
from .model import AESANet

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


class TrainConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    learning_rate: float = Field(default=1e-4, gt=0.0)
    max_epochs: int = Field(default=100, ge=1)
    patience: int = Field(default=10, ge=1)
    alpha: float = Field(default=DEFAULT_ALPHA, ge=0.0)
    margin: float = Field(default=DEFAULT_MARGIN, ge=0.0)
    epsilon: float = Field(default=DEFAULT_EPSILON, gt=0.0, lt=1.0)
    buffer_capacity: int = Field(default=DEFAULT_CAPACITY, ge=1)
    seed: int = 0
    shuffle: bool = True


@dataclass
class AdamMoments:
    first: dict[str, Tensor] = field(default_factory=dict)
    second: dict[str, Tensor] = field(default_factory=dict)


def adam_update(params: dict[str, Tensor], grads: dict[str, Tensor], moments: AdamMoments,
                lr: float, step: int, beta1: float = ADAM_BETA1, beta2: float = ADAM_BETA2,
                eps: float = ADAM_EPS) -> tuple[dict[str, Tensor], AdamMoments]:
    """
    One bias-corrected Adam step.

    Args:
        params: Current parameter values by name
        grads: Gradients by name (same shapes)
        moments: First/second moment estimates; missing entries start at zero
        lr: Learning rate
        step: 1-based update counter used for bias correction

    Returns:
        New parameter values and new moments; inputs are left untouched
    """
    if step < 1:
        raise ValidationError(f"Adam step counter starts at 1, got {step}")

    new_params, first, second = {}, {}, {}
    for name, value in params.items():
        grad = grads[name]
        if grad.shape != value.shape:
            raise ShapeError(f"Gradient for {name} has shape {tuple(grad.shape)}, parameter {tuple(value.shape)}")

        m = moments.first.get(name, torch.zeros_like(value))
        v = moments.second.get(name, torch.zeros_like(value))
        m = beta1 * m + (1 - beta1) * grad
        v = beta2 * v + (1 - beta2) * grad * grad

        m_hat = m / (1 - beta1 ** step)
        v_hat = v / (1 - beta2 ** step)
        new_params[name] = value - lr * m_hat / (torch.sqrt(v_hat) + eps)
        first[name], second[name] = m, v

    return new_params, AdamMoments(first=first, second=second)


class EarlyStopping:
    """Stop when validation MSE has not strictly improved for `patience` epochs."""

    def __init__(self, patience: int = 10):
        if patience < 1:
            raise ValidationError(f"patience must be at least 1, got {patience}")
        self.patience = patience
        self.counter = 0
        self.best_score: float | None = None
        self.best_epoch: int | None = None
        self.early_stop = False

    def __call__(self, val_mse: float, epoch: int) -> bool:
        """Record one epoch; returns True when it is a new best."""
        if self.best_score is None or val_mse < self.best_score:
            self.best_score = val_mse
            self.best_epoch = epoch
            self.counter = 0
            return True

        self.counter += 1
        logger.info(f"Early stopping counter: {self.counter}/{self.patience}")
        if self.counter >= self.patience:
            self.early_stop = True
        return False


@dataclass
class TrainState:
    model: AESANet
    config: TrainConfig
    buffers: list[MemoryBuffer]
    moments: AdamMoments = field(default_factory=AdamMoments)
    step: int = 0
    epoch: int = 0
    best_val_mse: float = math.inf
    epochs_since_improvement: int = 0
    dropout_generator: torch.Generator | None = None
    mining_rng: np.random.Generator | None = None
    shuffle_rng: np.random.Generator | None = None

    @classmethod
    def create(cls, model: AESANet, config: TrainConfig) -> "TrainState":
        """Fresh state; dropout, mining and shuffling draw from separate seeded streams."""
        return cls(
            model=model,
            config=config,
            buffers=[MemoryBuffer(config.buffer_capacity, axis) for axis in AXES],
            dropout_generator=torch.Generator().manual_seed(config.seed),
            mining_rng=np.random.default_rng([config.seed, 1]),
            shuffle_rng=np.random.default_rng([config.seed, 2]),
        )

    def buffer_occupancy(self) -> dict[str, int]:
        return {buffer.axis: len(buffer) for buffer in self.buffers}


@dataclass
class EpochRecord:
    epoch: int
    train_mse: float
    train_triplet: float
    train_total: float
    triplet_active_fraction: float
    val_mse: float
    val_mse_raw: float | None
    buffer_occupancy: dict[str, int]
    improved: bool
    seconds: float

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def apply_parameters(model: AESANet, values: dict[str, Tensor]):
    with torch.no_grad():
        for name, param in model.named_parameters():
            param.copy_(values[name])


def train_step(state: TrainState, features, targets) -> tuple[TrainState, LossBreakdown]:
    """
    One single-sample update: forward in train mode, MSE over the four axes,
    per-axis triplet mining against the existing buffers, Adam step, then
    push the current embedding into every buffer.
    """
    config = state.config
    model = state.model
    targets = np.asarray(targets, dtype=np.float64).reshape(-1)
    if targets.size != len(AXES) or np.any(targets < 0.0) or np.any(targets > 1.0):
        raise ValidationError(f"Targets must be {len(AXES)} normalized scores in [0, 1], got {targets.tolist()}")

    model.train()
    output = model(features, generator=state.dropout_generator)
    dtype = output.clip_scores.dtype
    mse = mse_loss(output.clip_scores, torch.as_tensor(targets, dtype=dtype))

    terms, valid_axes = [], []
    for axis, buffer, target in zip(AXES, state.buffers, targets, strict=True):
        mined = buffer.sample_triplet(float(target), config.epsilon, state.mining_rng)
        if mined is None:
            continue
        z_p, z_n = mined
        terms.append(triplet_loss(output.embedding, z_p.to(dtype), z_n.to(dtype), config.margin))
        valid_axes.append(axis)
    triplet = torch.stack(terms).mean() if terms else torch.zeros((), dtype=dtype)

    if config.alpha == 0.0:
        objective = mse
        triplet = triplet.detach()
    else:
        objective = total_loss(mse, triplet, config.alpha)

    if not torch.isfinite(objective):
        raise NumericError(
            f"Non-finite loss at step {state.step + 1}: mse={mse.item()}, triplet={triplet.item()}"
        )

    model.zero_grad(set_to_none=True)
    objective.backward()

    params = {name: param.detach() for name, param in model.named_parameters()}
    grads = {
        name: param.grad if param.grad is not None else torch.zeros_like(param)
        for name, param in model.named_parameters()
    }
    state.step += 1
    new_params, state.moments = adam_update(params, grads, state.moments, config.learning_rate, state.step)
    apply_parameters(model, new_params)

    embedding = output.embedding.detach()
    for buffer, target in zip(state.buffers, targets, strict=True):
        buffer.push(embedding, float(target))

    mse_value = mse.item()
    triplet_value = triplet.item()
    breakdown = LossBreakdown(
        mse=mse_value,
        triplet=triplet_value,
        total=total_loss(mse_value, triplet_value, config.alpha),
        alpha=config.alpha,
        valid_triplet_axes=valid_axes,
    )
    logger.debug(f"step {state.step}: mse={breakdown.mse:.6f} triplet={breakdown.triplet:.6f} "
                 f"axes={','.join(valid_axes) or '-'}")
    return state, breakdown


def validation_mse(model: AESANet, samples: list[TrainingSample]) -> float:
    """Mean per-clip MSE on normalized scores, evaluation mode."""
    if not samples:
        raise ValidationError("Validation set is empty")
    was_training = model.training
    model.eval()
    try:
        with torch.no_grad():
            losses = [
                mse_loss(model(sample.stack).clip_scores, torch.as_tensor(sample.targets, dtype=model.fusion.dtype)).item()
                for sample in samples
            ]
    finally:
        model.train(was_training)
    return float(np.mean(losses))


def train_epoch(state: TrainState, samples: list[TrainingSample]) -> list[LossBreakdown]:
    """One pass over the training samples in (seeded) shuffled order."""
    order = state.shuffle_rng.permutation(len(samples)) if state.config.shuffle else np.arange(len(samples))
    breakdowns = []
    for index in order:
        sample = samples[int(index)]
        _, breakdown = train_step(state, sample.stack, sample.targets)
        breakdowns.append(breakdown)
    state.epoch += 1
    return breakdowns


@dataclass
class FitResult:
    model: AESANet
    history: list[EpochRecord]
    best_epoch: int
    best_val_mse: float
    state: TrainState


def fit(train_samples: list[TrainingSample], val_samples: list[TrainingSample], config: TrainConfig,
        model: AESANet, scale: ScoreScale | None = None,
        evaluate: Callable[[AESANet, list[TrainingSample]], float] = validation_mse,
        history_path: str | Path | None = None) -> FitResult:
    """
    Train with early stopping on validation MSE.

    Args:
        train_samples: Training clips with normalized targets
        val_samples: Validation clips
        config: Optimization settings
        model: Freshly initialized model, updated in place
        scale: Rating scale, used only to report validation MSE in raw units
        evaluate: Validation metric (lower is better)
        history_path: Optional JSONL file receiving one line per epoch

    Returns:
        FitResult whose model holds the best-validation parameters
    """
    if not train_samples:
        raise ValidationError("Training set is empty")
    if not val_samples:
        raise ValidationError("Validation set is empty")

    state = TrainState.create(model, config)
    stopper = EarlyStopping(config.patience)
    best_params = copy.deepcopy(model.state_dict())
    history: list[EpochRecord] = []

    history_file = None
    if history_path is not None:
        history_path = Path(history_path)
        history_path.parent.mkdir(parents=True, exist_ok=True)
        history_file = open(history_path, "w")

    logger.info(f"Training on {len(train_samples)} clips, validating on {len(val_samples)} "
                f"(alpha={config.alpha}, margin={config.margin}, epsilon={config.epsilon}, "
                f"capacity={config.buffer_capacity}, seed={config.seed})")
    started = time.monotonic()
    try:
        for epoch in range(1, config.max_epochs + 1):
            epoch_started = time.monotonic()
            breakdowns = train_epoch(state, train_samples)

            val = evaluate(model, val_samples)
            if not math.isfinite(val):
                raise NumericError(f"Validation MSE is not finite at epoch {epoch}")

            improved = stopper(val, epoch)
            if improved:
                best_params = copy.deepcopy(model.state_dict())
            state.best_val_mse = stopper.best_score
            state.epochs_since_improvement = stopper.counter

            record = EpochRecord(
                epoch=epoch,
                train_mse=float(np.mean([b.mse for b in breakdowns])),
                train_triplet=float(np.mean([b.triplet for b in breakdowns])),
                train_total=float(np.mean([b.total for b in breakdowns])),
                triplet_active_fraction=float(np.mean([bool(b.valid_triplet_axes) for b in breakdowns])),
                val_mse=val,
                val_mse_raw=val * scale.span ** 2 if scale is not None else None,
                buffer_occupancy=state.buffer_occupancy(),
                improved=improved,
                seconds=time.monotonic() - epoch_started,
            )
            history.append(record)
            if history_file is not None:
                history_file.write(record.to_json() + "\n")
                history_file.flush()

            logger.info(f"Epoch {epoch}/{config.max_epochs}: train mse={record.train_mse:.5f} "
                        f"triplet={record.train_triplet:.5f} val mse={val:.5f}"
                        f"{' (best)' if improved else ''}")

            if stopper.early_stop:
                logger.info(f"Early stopping after epoch {epoch}; best epoch {stopper.best_epoch}")
                break
    finally:
        if history_file is not None:
            history_file.close()

    model.load_state_dict(best_params)
    model.eval()
    logger.info(f"Training finished in {format_duration(time.monotonic() - started)}; "
                f"best validation MSE {stopper.best_score:.5f} at epoch {stopper.best_epoch}")
    return FitResult(
        model=model,
        history=history,
        best_epoch=stopper.best_epoch,
        best_val_mse=stopper.best_score,
        state=state,
    )
