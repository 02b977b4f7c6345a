import struct

import pytest
import torch

from aesanet.core.checkpoint import decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint
from aesanet.core.model import forward
from aesanet.utils.errors import BadMagicError, CorruptCheckpointError, ShapeError, UnsupportedVersionError
from conftest import make_stack


def test_round_trip_predictions_identical(tiny_model, tmp_path):
    with torch.no_grad():
        tiny_model.fusion.copy_(torch.tensor([0.5, -0.1, 0.2]))
    stack = make_stack(3, 9, 8, seed=2)
    before = forward(tiny_model, stack)

    path = tmp_path / "model.aesc"
    save_checkpoint(tiny_model, path, metadata={"seed": 4, "scale_lower": 1.0})
    model, metadata = load_checkpoint(path)

    after = forward(model, stack)
    assert torch.equal(before.clip_scores, after.clip_scores)
    assert torch.equal(before.frame_scores, after.frame_scores)
    assert model.config == tiny_model.config
    assert metadata == {"seed": 4, "scale_lower": 1.0}
    assert not model.training


def test_bad_magic(tiny_model):
    data = b"ZZZZ" + encode_checkpoint(tiny_model)[4:]
    with pytest.raises(BadMagicError):
        decode_checkpoint(data)


def test_version_mismatch(tiny_model):
    data = bytearray(encode_checkpoint(tiny_model))
    data[4:6] = struct.pack("<H", 2)
    with pytest.raises(UnsupportedVersionError):
        decode_checkpoint(bytes(data))


@pytest.mark.parametrize("cut", [10, 200, -3])
def test_truncated(tiny_model, cut):
    data = encode_checkpoint(tiny_model)
    with pytest.raises(CorruptCheckpointError):
        decode_checkpoint(data[:cut])


def test_trailing_bytes(tiny_model):
    with pytest.raises(CorruptCheckpointError):
        decode_checkpoint(encode_checkpoint(tiny_model) + b"\x00")


def test_loaded_model_rejects_other_dimension(tiny_model, tmp_path):
    path = tmp_path / "model.aesc"
    save_checkpoint(tiny_model, path)
    model, _ = load_checkpoint(path)
    with pytest.raises(ShapeError):
        forward(model, make_stack(3, 4, 12))
