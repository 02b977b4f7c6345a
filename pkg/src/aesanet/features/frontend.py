"""Deterministic stand-in for a pretrained self-supervised audio frontend.

The real frontend is consumed as precomputed layer-stack files. This module
produces shape-correct stacks directly from audio so the full pipeline can run
without pretrained weights: each frame is summarised by log band energies,
then every layer applies its own seeded random projection.
"""

import numpy as np

from ..utils.config import FRAME_SAMPLES, TARGET_SAMPLE_RATE
from ..utils.errors import InvalidClipError
from .audio import AudioClip
from .stack_io import LayerStack

NUM_BANDS = 24
LOG_FLOOR = 1e-10


def num_frames(num_samples: int) -> int:
    """One frame per FRAME_SAMPLES samples, never fewer than one."""
    return max(1, num_samples // FRAME_SAMPLES)


def frame_band_energies(samples: np.ndarray) -> np.ndarray:
    """Log energies in NUM_BANDS equal-width FFT bands for each frame (T x NUM_BANDS)."""
    frames_count = num_frames(samples.size)
    needed = frames_count * FRAME_SAMPLES
    if samples.size < needed:
        samples = np.pad(samples, (0, needed - samples.size))
    frames = samples[:needed].reshape(frames_count, FRAME_SAMPLES)

    window = np.hanning(FRAME_SAMPLES)
    power = np.abs(np.fft.rfft(frames * window, axis=1)) ** 2
    bands = np.array_split(power, NUM_BANDS, axis=1)
    energies = np.stack([band.sum(axis=1) for band in bands], axis=1)
    return np.log(energies + LOG_FLOOR)


def synthetic_frontend(clip: AudioClip, seed: int, num_layers: int, dim: int) -> LayerStack:
    """
    Produce a seeded L x T x D layer stack from a 16 kHz clip.

    Args:
        clip: Clip at TARGET_SAMPLE_RATE
        seed: Projection seed; layer l uses the stream (seed, l)
        num_layers: L
        dim: D

    Returns:
        LayerStack with T = max(1, len(samples) // 320)
    """
    if clip.sample_rate != TARGET_SAMPLE_RATE:
        raise InvalidClipError(
            f"Synthetic frontend expects {TARGET_SAMPLE_RATE} Hz audio, clip {clip.clip_id!r} is at {clip.sample_rate} Hz"
        )
    if num_layers < 1 or dim < 1:
        raise InvalidClipError(f"Layer count and dimension must be positive, got L={num_layers}, D={dim}")

    stats = frame_band_energies(clip.samples)
    # Standardise per clip so projections stay in a tame range.
    stats = (stats - stats.mean()) / (stats.std() + 1e-6)

    layers = []
    for layer in range(num_layers):
        rng = np.random.default_rng([seed, layer])
        projection = rng.uniform(-1.0, 1.0, size=(NUM_BANDS, dim)) * np.sqrt(3.0 / NUM_BANDS)
        layers.append(np.tanh(stats @ projection))

    values = np.stack(layers, axis=0).astype(np.float32)
    return LayerStack(values=values, clip_id=clip.clip_id)
