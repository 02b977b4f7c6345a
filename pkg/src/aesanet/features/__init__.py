"""Audio preparation, frontend feature stacks and layer fusion."""

from .audio import AudioClip, load_audio, resample
from .frontend import num_frames, synthetic_frontend
from .fusion import FusionWeights, fuse_layers, softmax_weights
from .stack_io import (
    LayerStack,
    decode_layer_stack,
    encode_layer_stack,
    load_layer_stack,
    save_layer_stack,
)

__all__ = [
    "AudioClip",
    "FusionWeights",
    "LayerStack",
    "decode_layer_stack",
    "encode_layer_stack",
    "fuse_layers",
    "load_audio",
    "load_layer_stack",
    "num_frames",
    "resample",
    "save_layer_stack",
    "softmax_weights",
    "synthetic_frontend",
]
