"""Manifest ingestion, score normalization and dataset splitting."""

from .manifest import (
    MANIFEST_COLUMNS,
    ManifestEntry,
    ScoreScale,
    TrainingSample,
    build_samples,
    denormalize_score,
    load_feature_index,
    normalize_score,
    parse_manifest,
    split_train_val,
    write_feature_index,
)

__all__ = [
    "MANIFEST_COLUMNS",
    "ManifestEntry",
    "ScoreScale",
    "TrainingSample",
    "build_samples",
    "denormalize_score",
    "load_feature_index",
    "normalize_score",
    "parse_manifest",
    "split_train_val",
    "write_feature_index",
]
