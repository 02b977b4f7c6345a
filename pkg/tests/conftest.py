"""Shared fixtures: tiny model configs, random layer stacks and on-disk corpora."""

from pathlib import Path

import numpy as np
import pandas as pd
import pytest
import soundfile as sf

from aesanet.core.model import ModelConfig, init_params
from aesanet.data.manifest import MANIFEST_COLUMNS, TrainingSample
from aesanet.features.stack_io import LayerStack
from aesanet.utils.config import AXES, DOMAINS


def make_stack(num_layers: int, num_frames: int, dim: int, seed: int = 0, clip_id: str = "clip") -> LayerStack:
    rng = np.random.default_rng(seed)
    return LayerStack(values=rng.normal(size=(num_layers, num_frames, dim)).astype(np.float32), clip_id=clip_id)


def make_samples(count: int, config: ModelConfig, num_frames: int = 6, seed: int = 0) -> list[TrainingSample]:
    rng = np.random.default_rng(seed)
    samples = []
    for index in range(count):
        clip_id = f"clip{index:03d}"
        samples.append(TrainingSample(
            clip_id=clip_id,
            stack=make_stack(config.num_layers, num_frames, config.input_dim, seed=seed * 1000 + index, clip_id=clip_id),
            targets=rng.uniform(0.05, 0.95, size=len(AXES)),
            domain=DOMAINS[index % len(DOMAINS)],
            system_id=f"sys{index % 4}",
        ))
    return samples


def write_corpus(root: Path, count: int = 6, seconds: float = 0.2, sample_rate: int = 16000,
                 seed: int = 0, val_every: int = 3) -> Path:
    """Write `count` short tones plus a manifest; every `val_every`-th clip is tagged split=val."""
    rng = np.random.default_rng(seed)
    audio_dir = root / "audio"
    audio_dir.mkdir(parents=True, exist_ok=True)

    rows = []
    for index in range(count):
        clip_id = f"c{index:02d}"
        t = np.arange(int(seconds * sample_rate)) / sample_rate
        tone = 0.3 * np.sin(2 * np.pi * (200 + 60 * index) * t) + 0.05 * rng.normal(size=t.size)
        sf.write(audio_dir / f"{clip_id}.wav", np.clip(tone, -1, 1), sample_rate, subtype="FLOAT")
        scores = np.round(rng.uniform(1.5, 9.5, size=len(AXES)), 2)
        rows.append([
            clip_id,
            f"audio/{clip_id}.wav",
            DOMAINS[index % len(DOMAINS)],
            f"sys{index % 2}",
            "val" if index % val_every == val_every - 1 else "train",
            *scores,
        ])

    manifest = root / "manifest.csv"
    pd.DataFrame(rows, columns=MANIFEST_COLUMNS).to_csv(manifest, index=False)
    return manifest


@pytest.fixture
def tiny_config() -> ModelConfig:
    return ModelConfig(input_dim=8, num_layers=3, adapter_dim=4, lstm_hidden=4, shared_dim=8, attention_heads=2)


@pytest.fixture
def tiny_model(tiny_config):
    return init_params(tiny_config, seed=0)


@pytest.fixture
def corpus(tmp_path) -> Path:
    return write_corpus(tmp_path)
