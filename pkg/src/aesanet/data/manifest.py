from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd
from loguru import logger
from pydantic import BaseModel, ConfigDict, model_validator

from ..features.stack_io import LayerStack, load_layer_stack
from ..utils.config import AXES, DOMAINS
from ..utils.errors import (
    DuplicateClipIdError,
    ManifestError,
    MissingColumnError,
    ScoreRangeError,
    UnknownDomainError,
    ValidationError,
)

MANIFEST_COLUMNS = ["clip_id", "path", "domain", "system_id", "split", "pq", "pc", "ce", "cu"]
INDEX_FILENAME = "index.csv"
INDEX_COLUMNS = ["clip_id", "path"]


class ScoreScale(BaseModel):
    """Rating-scale endpoints used for the affine map onto [0, 1]."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    lower: float = 1.0
    upper: float = 10.0

    @model_validator(mode="after")
    def _check_order(self) -> "ScoreScale":
        if not self.lower < self.upper:
            raise ValueError(f"Scale lower bound {self.lower} must be below upper bound {self.upper}")
        return self

    @property
    def span(self) -> float:
        return self.upper - self.lower


@dataclass
class ManifestEntry:
    clip_id: str
    path: str
    domain: str
    system_id: str | None
    split: str
    scores: dict[str, float]  # raw mean listener score per axis
    line: int = 0

    def score_vector(self) -> np.ndarray:
        return np.array([self.scores[axis] for axis in AXES], dtype=np.float64)


@dataclass
class TrainingSample:
    clip_id: str
    stack: LayerStack
    targets: np.ndarray  # normalized, AXES order
    domain: str = ""
    system_id: str | None = None


def normalize_score(raw, scale: ScoreScale = ScoreScale()):
    """Map raw ratings from [lower, upper] onto [0, 1]."""
    values = np.asarray(raw, dtype=np.float64)
    if np.any(values < scale.lower) or np.any(values > scale.upper) or not np.all(np.isfinite(values)):
        raise ScoreRangeError(f"Score {raw} lies outside the scale [{scale.lower}, {scale.upper}]")
    normalized = (values - scale.lower) / scale.span
    return float(normalized) if normalized.ndim == 0 else normalized


def denormalize_score(normalized, scale: ScoreScale = ScoreScale()):
    """Inverse of normalize_score."""
    values = np.asarray(normalized, dtype=np.float64)
    if np.any(values < 0.0) or np.any(values > 1.0) or not np.all(np.isfinite(values)):
        raise ScoreRangeError(f"Normalized score {normalized} lies outside [0, 1]")
    raw = values * scale.span + scale.lower
    return float(raw) if raw.ndim == 0 else raw


def parse_manifest(path: str | Path, scale: ScoreScale = ScoreScale()) -> list[ManifestEntry]:
    """
    Read and validate a manifest file.

    Args:
        path: Delimited text file with header clip_id,path,domain,system_id,split,pq,pc,ce,cu
        scale: Rating scale the raw scores must respect

    Returns:
        Entries in file order
    """
    path = Path(path)
    frame = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    frame.columns = [column.strip() for column in frame.columns]

    missing = [column for column in MANIFEST_COLUMNS if column not in frame.columns]
    if missing:
        raise MissingColumnError(f"Manifest {path} is missing column(s): {', '.join(missing)}", line=1)

    entries = []
    seen: dict[str, int] = {}
    for offset, row in enumerate(frame.itertuples(index=False)):
        line = offset + 2  # header is line 1
        record = row._asdict()

        clip_id = record["clip_id"].strip()
        if not clip_id:
            raise ManifestError("empty clip_id", line)
        if clip_id in seen:
            raise DuplicateClipIdError(clip_id, line)
        seen[clip_id] = line

        domain = record["domain"].strip().lower()
        if domain not in DOMAINS:
            raise UnknownDomainError(f"unknown domain {record['domain']!r} (expected one of {', '.join(DOMAINS)})", line)

        scores = {}
        for axis in AXES:
            text = record[axis.lower()].strip()
            try:
                value = float(text)
            except ValueError:
                raise ManifestError(f"{axis} score {text!r} for {clip_id!r} is not a number", line)
            if not scale.lower <= value <= scale.upper:
                raise ScoreRangeError(
                    f"{axis} score {value} for {clip_id!r} outside scale [{scale.lower}, {scale.upper}]", line
                )
            scores[axis] = value

        entries.append(ManifestEntry(
            clip_id=clip_id,
            path=record["path"].strip(),
            domain=domain,
            system_id=record["system_id"].strip() or None,
            split=record["split"].strip(),
            scores=scores,
            line=line,
        ))

    logger.info(f"Parsed {len(entries)} manifest entries from {path}")
    return entries


def split_train_val(entries: list[ManifestEntry], val_count: int,
                    seed: int) -> tuple[list[ManifestEntry], list[ManifestEntry]]:
    """
    Seeded split, stratified by domain.

    Each domain contributes validation clips in proportion to its size;
    leftover slots go to the domains with the largest fractional quotas.
    Both halves keep manifest order.
    """
    if val_count < 0 or val_count >= len(entries):
        raise ValidationError(f"val_count must lie in [0, {len(entries)}), got {val_count}")

    by_domain: dict[str, list[int]] = {}
    for index, entry in enumerate(entries):
        by_domain.setdefault(entry.domain, []).append(index)
    domains = sorted(by_domain, key=lambda d: DOMAINS.index(d) if d in DOMAINS else len(DOMAINS))

    quotas = {d: val_count * len(by_domain[d]) / len(entries) for d in domains}
    allocation = {d: int(np.floor(quotas[d])) for d in domains}
    remaining = val_count - sum(allocation.values())
    by_remainder = sorted(domains, key=lambda d: (-(quotas[d] - allocation[d]), domains.index(d)))
    for domain in by_remainder[:remaining]:
        allocation[domain] += 1

    rng = np.random.default_rng(seed)
    val_indices: set[int] = set()
    for domain in domains:
        shuffled = rng.permutation(by_domain[domain])
        val_indices.update(int(i) for i in shuffled[:allocation[domain]])

    train = [entry for index, entry in enumerate(entries) if index not in val_indices]
    val = [entry for index, entry in enumerate(entries) if index in val_indices]
    logger.info(f"Split {len(entries)} entries into {len(train)} train / {len(val)} validation "
                f"({', '.join(f'{d}={allocation[d]}' for d in domains)})")
    return train, val


def write_feature_index(features_dir: str | Path, clip_paths: dict[str, Path]):
    """Write index.csv mapping clip_id to a stack file path relative to features_dir."""
    features_dir = Path(features_dir)
    rows = [
        (clip_id, Path(clip_paths[clip_id]).relative_to(features_dir).as_posix())
        for clip_id in sorted(clip_paths)
    ]
    pd.DataFrame(rows, columns=INDEX_COLUMNS).to_csv(features_dir / INDEX_FILENAME, index=False, lineterminator="\n")


def load_feature_index(features_dir: str | Path) -> dict[str, Path]:
    features_dir = Path(features_dir)
    index_path = features_dir / INDEX_FILENAME
    if not index_path.exists():
        raise ValidationError(f"No feature index at {index_path}; run extract-features first")
    frame = pd.read_csv(index_path, dtype=str, keep_default_na=False)
    if list(frame.columns) != INDEX_COLUMNS:
        raise MissingColumnError(f"Feature index {index_path} must have header {','.join(INDEX_COLUMNS)}", line=1)
    return {row.clip_id: features_dir / row.path for row in frame.itertuples(index=False)}


def build_samples(entries: list[ManifestEntry], features_dir: str | Path,
                  scale: ScoreScale = ScoreScale()) -> list[TrainingSample]:
    """Load the layer stack of every entry and attach normalized targets."""
    index = load_feature_index(features_dir)
    missing = [entry.clip_id for entry in entries if entry.clip_id not in index or not index[entry.clip_id].exists()]
    if missing:
        raise ValidationError(f"Missing feature files for clip(s): {', '.join(missing)}")

    return [
        TrainingSample(
            clip_id=entry.clip_id,
            stack=load_layer_stack(index[entry.clip_id], clip_id=entry.clip_id),
            targets=normalize_score(entry.score_vector(), scale),
            domain=entry.domain,
            system_id=entry.system_id,
        )
        for entry in entries
    ]
