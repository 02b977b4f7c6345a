from dataclasses import dataclass
from typing import Literal

import numpy as np
import pandas as pd
from scipy import stats

from ..utils.errors import UndefinedCorrelationError, ValidationError

Level = Literal["utterance", "system"]


@dataclass(frozen=True)
class ScoredRecord:
    clip_id: str
    system_id: str | None
    domain: str
    axis: str
    prediction: float
    gold: float


@dataclass(frozen=True)
class AggregatedScore:
    group: tuple[str, str, str]  # (clip or system id, domain, axis)
    prediction: float
    gold: float

    @property
    def domain(self) -> str:
        return self.group[1]

    @property
    def axis(self) -> str:
        return self.group[2]


def _paired(x, y) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if x.size != y.size:
        raise ValidationError(f"Vectors differ in length: {x.size} vs {y.size}")
    if x.size < 2:
        raise UndefinedCorrelationError(f"Correlation needs at least 2 points, got {x.size}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValidationError("Correlation inputs must be finite")
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise UndefinedCorrelationError("Correlation is undefined for a constant vector")
    return x, y


def _bounded(value: float) -> float:
    return float(np.clip(value, -1.0, 1.0))


def pcc(x, y) -> float:
    """Pearson linear correlation (LCC)."""
    x, y = _paired(x, y)
    return _bounded(stats.pearsonr(x, y).statistic)


def srcc(x, y) -> float:
    """Spearman rank correlation with average ranks for ties."""
    x, y = _paired(x, y)
    return _bounded(stats.spearmanr(x, y).statistic)


def ktau(x, y) -> float:
    """Kendall's tau-b (tie-corrected)."""
    x, y = _paired(x, y)
    return _bounded(stats.kendalltau(x, y, variant="b").statistic)


def mse(x, y) -> float:
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if x.size != y.size or x.size == 0:
        raise ValidationError(f"MSE needs two non-empty vectors of equal length, got {x.size} and {y.size}")
    return float(np.mean((x - y) ** 2))


def aggregate(records: list[ScoredRecord], level: Level = "system") -> list[AggregatedScore]:
    """
    Average predictions and gold scores per group.

    System level groups by (system_id, domain, axis); utterance level keeps
    every record as its own group. Groups come back sorted by key.
    """
    if not records:
        raise ValidationError("Cannot aggregate an empty record list")
    if level not in ("utterance", "system"):
        raise ValidationError(f"Unknown aggregation level {level!r}")

    frame = pd.DataFrame([vars(record) for record in records])
    if level == "system":
        missing = frame.loc[frame["system_id"].isna() | (frame["system_id"] == ""), "clip_id"].tolist()
        if missing:
            raise ValidationError(f"System-level aggregation needs a system_id for clip(s): {', '.join(missing)}")
        key = "system_id"
    else:
        key = "clip_id"

    grouped = (
        frame.groupby([key, "domain", "axis"], sort=True)[["prediction", "gold"]]
        .mean()
        .reset_index()
    )
    if grouped.empty:
        raise ValidationError("Aggregation produced no groups")

    return [
        AggregatedScore(group=(row[key], row["domain"], row["axis"]),
                        prediction=float(row["prediction"]), gold=float(row["gold"]))
        for _, row in grouped.iterrows()
    ]
