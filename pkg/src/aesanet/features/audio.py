from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np
import soundfile as sf
from loguru import logger
from scipy.signal import resample_poly

from ..utils.config import TARGET_SAMPLE_RATE
from ..utils.errors import InvalidClipError

# Kaiser-windowed sinc anti-aliasing filter used by the polyphase resampler.
# Fixed so that resampled audio (and everything derived from it) is reproducible.
RESAMPLE_WINDOW = ("kaiser", 5.0)


@dataclass(frozen=True)
class AudioClip:
    """Mono waveform with amplitudes in [-1, 1]."""
    samples: np.ndarray
    sample_rate: int
    clip_id: str = ""

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise InvalidClipError(f"Clip {self.clip_id!r}: samples must be one-dimensional, got shape {samples.shape}")
        if samples.size == 0:
            raise InvalidClipError(f"Clip {self.clip_id!r} has no samples")
        if not isinstance(self.sample_rate, int | np.integer) or self.sample_rate <= 0:
            raise InvalidClipError(f"Clip {self.clip_id!r}: sample rate must be a positive integer, got {self.sample_rate}")
        if not np.all(np.isfinite(samples)):
            raise InvalidClipError(f"Clip {self.clip_id!r} contains non-finite samples")
        if np.max(np.abs(samples)) > 1.0:
            raise InvalidClipError(f"Clip {self.clip_id!r} has amplitudes outside [-1, 1]")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate


def load_audio(path: str | Path, clip_id: str = "") -> AudioClip:
    """
    Read an audio file into a mono AudioClip.

    Multichannel audio is downmixed by averaging the channels. No gain
    normalization or trimming is applied.
    """
    try:
        data, sample_rate = sf.read(str(path), dtype="float64", always_2d=True)
    except (sf.LibsndfileError, RuntimeError) as e:
        raise InvalidClipError(f"Cannot read audio for clip {clip_id!r} from {path}: {e}")

    samples = data.mean(axis=1)
    logger.debug(f"Loaded {path}: {samples.size} samples at {sample_rate} Hz, {data.shape[1]} channel(s)")
    return AudioClip(samples=samples, sample_rate=int(sample_rate), clip_id=clip_id)


def resample(clip: AudioClip, target_rate: int = TARGET_SAMPLE_RATE) -> AudioClip:
    """
    Resample a clip with a polyphase windowed-sinc filter.

    Args:
        clip: Input clip
        target_rate: Output sample rate in Hz

    Returns:
        A clip at target_rate holding ceil(n * target_rate / sample_rate) samples;
        the input clip itself when the rates already agree
    """
    if target_rate <= 0:
        raise InvalidClipError(f"Target rate must be positive, got {target_rate}")

    if clip.sample_rate == target_rate:
        return clip

    ratio = Fraction(target_rate, clip.sample_rate)
    resampled = resample_poly(
        clip.samples, ratio.numerator, ratio.denominator, window=RESAMPLE_WINDOW
    )
    # The filter can overshoot slightly on full-scale transients.
    overshoot = np.abs(resampled) > 1.0
    if overshoot.any():
        logger.debug(f"Clipped {int(overshoot.sum())} overshooting samples of clip {clip.clip_id!r} "
                     f"(peak {float(np.abs(resampled).max()):.4f})")
        resampled = np.clip(resampled, -1.0, 1.0)

    logger.debug(f"Resampled clip {clip.clip_id!r} {clip.sample_rate} -> {target_rate} Hz "
                 f"({clip.samples.size} -> {resampled.size} samples)")
    return AudioClip(samples=resampled, sample_rate=target_rate, clip_id=clip.clip_id)
