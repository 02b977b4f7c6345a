import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from loguru import logger

from ..utils.errors import (
    BadMagicError,
    NonFiniteValueError,
    ShapeError,
    TruncatedPayloadError,
    UnsupportedVersionError,
)

STACK_MAGIC = b"AESF"
STACK_VERSION = 1
# magic, version u16, L u32, T u32, D u32 - little endian, no padding
STACK_HEADER = struct.Struct("<4sHIII")
STACK_DTYPE = np.dtype("<f4")


@dataclass(frozen=True)
class LayerStack:
    """Per-clip hidden states of every frontend layer, shaped L x T x D."""
    values: np.ndarray
    clip_id: str = ""

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float32)
        if values.ndim != 3 or min(values.shape) < 1:
            raise ShapeError(f"Layer stack for {self.clip_id!r} must be a non-empty L x T x D array, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise NonFiniteValueError(f"Layer stack for {self.clip_id!r} contains non-finite values")
        object.__setattr__(self, "values", values)

    @property
    def num_layers(self) -> int:
        return self.values.shape[0]

    @property
    def num_frames(self) -> int:
        return self.values.shape[1]

    @property
    def dim(self) -> int:
        return self.values.shape[2]


def encode_layer_stack(stack: LayerStack) -> bytes:
    """Serialize a stack: header followed by float32 values in layer, frame, dim order."""
    num_layers, num_frames, dim = stack.values.shape
    header = STACK_HEADER.pack(STACK_MAGIC, STACK_VERSION, num_layers, num_frames, dim)
    return header + np.ascontiguousarray(stack.values, dtype=STACK_DTYPE).tobytes()


def decode_layer_stack(data: bytes, clip_id: str = "") -> LayerStack:
    """Parse the bytes written by encode_layer_stack."""
    if data[:4] != STACK_MAGIC:
        raise BadMagicError(f"Feature file for {clip_id!r} has magic {bytes(data[:4])!r}, expected {STACK_MAGIC!r}")
    if len(data) < STACK_HEADER.size:
        raise TruncatedPayloadError(f"Feature file for {clip_id!r} has a truncated header")

    _, version, num_layers, num_frames, dim = STACK_HEADER.unpack_from(data)
    if version != STACK_VERSION:
        raise UnsupportedVersionError(f"Feature file for {clip_id!r} has version {version}, expected {STACK_VERSION}")
    if min(num_layers, num_frames, dim) < 1:
        raise ShapeError(f"Feature file for {clip_id!r} declares empty shape ({num_layers}, {num_frames}, {dim})")

    count = num_layers * num_frames * dim
    payload = memoryview(data)[STACK_HEADER.size:]
    expected = count * STACK_DTYPE.itemsize
    if len(payload) < expected:
        raise TruncatedPayloadError(
            f"Feature file for {clip_id!r} holds {len(payload) // STACK_DTYPE.itemsize} values, header declares {count}"
        )
    if len(payload) > expected:
        logger.warning(f"Feature file for {clip_id!r} has {len(payload) - expected} trailing bytes; ignoring them")

    values = np.frombuffer(payload[:expected], dtype=STACK_DTYPE).reshape(num_layers, num_frames, dim)
    if not np.all(np.isfinite(values)):
        raise NonFiniteValueError(f"Feature file for {clip_id!r} contains non-finite values")
    return LayerStack(values=values.astype(np.float32), clip_id=clip_id)


def save_layer_stack(stack: LayerStack, path: str | Path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_layer_stack(stack))
    logger.debug(f"Wrote layer stack {stack.values.shape} for {stack.clip_id!r} to {path}")


def load_layer_stack(path: str | Path, clip_id: str | None = None) -> LayerStack:
    """Read a layer-stack file; clip_id defaults to the file stem."""
    path = Path(path)
    return decode_layer_stack(path.read_bytes(), clip_id=clip_id if clip_id is not None else path.stem)
