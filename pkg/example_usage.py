#!/usr/bin/env python3
"""
Example usage of aesanet - Pure Python interface

This script walks through the whole pipeline on synthetic audio:
frontend features, training with the triplet buffer, prediction and
a Table-style metric report, without touching the command line.
"""

import numpy as np
import torch

from aesanet import (
    AXES,
    DOMAINS,
    ModelConfig,
    ScoreScale,
    TrainConfig,
    compute_report,
    fit,
    init_params,
    render_report,
    resample,
    synthetic_frontend,
)
from aesanet.data.manifest import TrainingSample, denormalize_score
from aesanet.evaluation.metrics import ScoredRecord
from aesanet.features.audio import AudioClip


def synthetic_corpus(count: int = 36, seed: int = 0) -> list[TrainingSample]:
    """Tones at 22.05 kHz whose ratings rise with pitch."""
    rng = np.random.default_rng(seed)
    samples = []
    t = np.arange(4410) / 22050
    for index in range(count):
        quality = rng.uniform()
        audio = 0.4 * np.sin(2 * np.pi * (180 + 1500 * quality) * t) + 0.03 * rng.normal(size=t.size)
        clip = resample(AudioClip(samples=np.clip(audio, -1, 1), sample_rate=22050, clip_id=f"clip{index:02d}"))
        stack = synthetic_frontend(clip, seed=seed, num_layers=4, dim=16)
        samples.append(TrainingSample(
            clip_id=clip.clip_id,
            stack=stack,
            targets=np.clip(0.15 + 0.7 * quality + rng.normal(scale=0.03, size=len(AXES)), 0, 1),
            domain=DOMAINS[index % len(DOMAINS)],
            system_id=f"sys{index % 6}",
        ))
    return samples


def basic_example():
    """Train a small model and score the held-out clips."""
    print("🚀 Building a synthetic corpus...")
    samples = synthetic_corpus()
    train, val = samples[:30], samples[30:]

    config = ModelConfig(input_dim=16, num_layers=4, adapter_dim=16, lstm_hidden=8,
                         shared_dim=16, attention_heads=2)
    model = init_params(config, seed=0)
    scale = ScoreScale()

    print(f"📊 Training on {len(train)} clips, validating on {len(val)}...")
    result = fit(train, val, TrainConfig(learning_rate=1e-3, max_epochs=8, patience=3), model, scale=scale)
    print(f"✅ Best epoch {result.best_epoch}, validation MSE {result.best_val_mse:.4f}")
    print(f"   Fusion weights: {np.round(result.model.fusion_weights().detach().numpy(), 3)}")

    print("\n🎧 Predicting every clip...")
    records = []
    with torch.no_grad():
        for sample in samples:
            output = result.model(sample.stack)
            raw = denormalize_score(output.clip_scores.double().numpy(), scale)
            gold = denormalize_score(sample.targets, scale)
            records.extend(
                ScoredRecord(sample.clip_id, sample.system_id, sample.domain, axis, float(raw[i]), float(gold[i]))
                for i, axis in enumerate(AXES)
            )

    print(render_report(compute_report(records, level="utterance", scale="raw 1-10"), "text"))


if __name__ == "__main__":
    basic_example()
