"""Binary checkpoint format.

Layout (little endian):
    magic "AESC" | version u16 | header length u32 | header JSON (utf-8)
    | array count u32 | per array: name length u16, name, ndim u8, dims u32 * ndim,
      float32 values in C order

The header JSON holds {"model": ModelConfig, "metadata": {...}}. Arrays follow
the module's registration order (see AESANet).
"""

import json
import struct
from pathlib import Path
from typing import Any

import numpy as np
import torch
from loguru import logger
from pydantic import ValidationError as PydanticValidationError

from ..utils.errors import BadMagicError, CorruptCheckpointError, UnsupportedVersionError
from .model import AESANet, ModelConfig

CHECKPOINT_MAGIC = b"AESC"
CHECKPOINT_VERSION = 1
ARRAY_DTYPE = np.dtype("<f4")


def encode_checkpoint(model: AESANet, metadata: dict[str, Any] | None = None) -> bytes:
    header = json.dumps(
        {"model": model.config.model_dump(mode="json"), "metadata": metadata or {}},
        sort_keys=True,
    ).encode("utf-8")

    state = model.state_dict()
    parts = [
        struct.pack("<4sHI", CHECKPOINT_MAGIC, CHECKPOINT_VERSION, len(header)),
        header,
        struct.pack("<I", len(state)),
    ]
    for name, tensor in state.items():
        array = tensor.detach().cpu().numpy().astype(ARRAY_DTYPE)
        encoded_name = name.encode("utf-8")
        parts.append(struct.pack("<H", len(encoded_name)))
        parts.append(encoded_name)
        parts.append(struct.pack(f"<B{array.ndim}I", array.ndim, *array.shape))
        parts.append(np.ascontiguousarray(array).tobytes())
    return b"".join(parts)


class _Reader:
    def __init__(self, data: bytes):
        self.data = memoryview(data)
        self.offset = 0

    def take(self, size: int) -> memoryview:
        if self.offset + size > len(self.data):
            raise CorruptCheckpointError("Checkpoint payload ends unexpectedly")
        chunk = self.data[self.offset:self.offset + size]
        self.offset += size
        return chunk

    def unpack(self, fmt: str) -> tuple:
        layout = struct.Struct(fmt)
        return layout.unpack(self.take(layout.size))


def decode_checkpoint(data: bytes) -> tuple[AESANet, dict[str, Any]]:
    if bytes(data[:4]) != CHECKPOINT_MAGIC:
        raise BadMagicError(f"Not a checkpoint: magic {bytes(data[:4])!r}, expected {CHECKPOINT_MAGIC!r}")

    reader = _Reader(data)
    _, version, header_len = reader.unpack("<4sHI")
    if version != CHECKPOINT_VERSION:
        raise UnsupportedVersionError(f"Checkpoint version {version} is not supported (expected {CHECKPOINT_VERSION})")

    try:
        header = json.loads(bytes(reader.take(header_len)).decode("utf-8"))
        config = ModelConfig.model_validate(header["model"])
    except (UnicodeDecodeError, json.JSONDecodeError, KeyError, TypeError, PydanticValidationError) as e:
        raise CorruptCheckpointError(f"Checkpoint header is unreadable: {e}")

    model = AESANet(config)
    expected = model.state_dict()
    (count,) = reader.unpack("<I")
    if count != len(expected):
        raise CorruptCheckpointError(f"Checkpoint holds {count} arrays, model defines {len(expected)}")

    state = {}
    for expected_name, expected_tensor in expected.items():
        (name_len,) = reader.unpack("<H")
        name = bytes(reader.take(name_len)).decode("utf-8", errors="replace")
        if name != expected_name:
            raise CorruptCheckpointError(f"Expected array {expected_name!r}, found {name!r}")
        (ndim,) = reader.unpack("<B")
        shape = reader.unpack(f"<{ndim}I") if ndim else ()
        if tuple(shape) != tuple(expected_tensor.shape):
            raise CorruptCheckpointError(
                f"Array {name!r} has shape {tuple(shape)}, config implies {tuple(expected_tensor.shape)}"
            )
        size = int(np.prod(shape)) * ARRAY_DTYPE.itemsize
        values = np.frombuffer(reader.take(size), dtype=ARRAY_DTYPE).reshape(shape)
        if not np.all(np.isfinite(values)):
            raise CorruptCheckpointError(f"Array {name!r} contains non-finite values")
        state[name] = torch.from_numpy(values.astype(np.float32))

    if reader.offset != len(reader.data):
        raise CorruptCheckpointError(f"Checkpoint has {len(reader.data) - reader.offset} trailing bytes")

    model.load_state_dict(state)
    model.eval()
    return model, header.get("metadata", {})


def save_checkpoint(model: AESANet, path: str | Path, metadata: dict[str, Any] | None = None):
    """Write model parameters and config; metadata must be JSON-serializable."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_checkpoint(model, metadata))
    logger.info(f"Saved checkpoint to {path}")


def load_checkpoint(path: str | Path) -> tuple[AESANet, dict[str, Any]]:
    """Read a checkpoint; the returned model is in evaluation mode and carries its config."""
    path = Path(path)
    model, metadata = decode_checkpoint(path.read_bytes())
    logger.info(f"Loaded checkpoint from {path} (D={model.config.input_dim}, L={model.config.num_layers})")
    return model, metadata
