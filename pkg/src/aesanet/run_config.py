"""`key = value` run configuration files."""

from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field
from pydantic import ValidationError as PydanticValidationError

from .core.buffer import DEFAULT_CAPACITY, DEFAULT_EPSILON
from .core.losses import DEFAULT_ALPHA, DEFAULT_MARGIN
from .core.model import ModelConfig
from .core.training import TrainConfig
from .data.manifest import ScoreScale
from .utils.errors import ConfigError


class RunConfig(BaseModel):
    """Every model, training and path setting of one training run."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    # paths
    manifest: Path | None = None
    features_dir: Path | None = None
    checkpoint_out: Path | None = None

    # model (input_dim and num_layers come from the feature files)
    adapter_dim: int = Field(default=256, gt=0)
    lstm_hidden: int = Field(default=128, gt=0)
    shared_dim: int = Field(default=128, gt=0)
    attention_heads: int = Field(default=4, gt=0)
    dropout_rate: float = Field(default=0.3, ge=0.0, lt=1.0)

    # training
    learning_rate: float = Field(default=1e-4, gt=0.0)
    max_epochs: int = Field(default=100, ge=1)
    patience: int = Field(default=10, ge=1)
    alpha: float = Field(default=DEFAULT_ALPHA, ge=0.0)
    margin: float = Field(default=DEFAULT_MARGIN, ge=0.0)
    epsilon: float = Field(default=DEFAULT_EPSILON, gt=0.0, lt=1.0)
    buffer_capacity: int = Field(default=DEFAULT_CAPACITY, ge=1)
    seed: int = 0
    shuffle: bool = True

    # data
    scale_lower: float = 1.0
    scale_upper: float = 10.0
    val_count: int | None = Field(default=None, ge=0)  # None: use the manifest split column
    split_seed: int | None = None

    def to_train_config(self, seed: int | None = None) -> TrainConfig:
        return TrainConfig(
            learning_rate=self.learning_rate,
            max_epochs=self.max_epochs,
            patience=self.patience,
            alpha=self.alpha,
            margin=self.margin,
            epsilon=self.epsilon,
            buffer_capacity=self.buffer_capacity,
            seed=self.seed if seed is None else seed,
            shuffle=self.shuffle,
        )

    def to_model_config(self, input_dim: int, num_layers: int) -> ModelConfig:
        return ModelConfig(
            input_dim=input_dim,
            num_layers=num_layers,
            adapter_dim=self.adapter_dim,
            lstm_hidden=self.lstm_hidden,
            shared_dim=self.shared_dim,
            attention_heads=self.attention_heads,
            dropout_rate=self.dropout_rate,
        )

    def to_scale(self) -> ScoreScale:
        return ScoreScale(lower=self.scale_lower, upper=self.scale_upper)


def parse_config_lines(text: str) -> dict[str, str]:
    """Split `key = value` lines; `#` starts a comment, blank lines are skipped."""
    values: dict[str, str] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", line=number)
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError("missing key before '='", line=number)
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", line=number)
        values[key] = value
    return values


def build_run_config(values: dict[str, object]) -> RunConfig:
    try:
        return RunConfig.model_validate(values)
    except PydanticValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in error['loc'])}: {error['msg']}" for error in e.errors()
        )
        raise ConfigError(f"invalid run configuration: {problems}")


def load_run_config(path: str | Path | None, overrides: dict[str, object] | None = None) -> RunConfig:
    """Read a run configuration file (optional) and apply command-line overrides on top."""
    values: dict[str, object] = {}
    if path is not None:
        values.update(parse_config_lines(Path(path).read_text()))
    values.update({key: value for key, value in (overrides or {}).items() if value is not None})
    return build_run_config(values)
