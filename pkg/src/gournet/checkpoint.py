"""Bit-exact binary checkpoints.

Layout (little-endian throughout): magic ``GNCK``, u32 version, u32 tensor
count, then per tensor: u16 name length, UTF-8 name, u8 ndim, ndim x u32
dims, raw float32 values row-major. Files are written atomically (temp
file + rename) and a save -> load -> save round trip is byte-identical.
"""

from __future__ import annotations

import os
import struct
import tempfile

import numpy as np

from .errors import CheckpointError

MAGIC = b"GNCK"
VERSION = 1


def save_checkpoint(tensors: dict[str, np.ndarray], path: str) -> None:
    """Write named tensors in insertion order."""
    blob = bytearray()
    blob += MAGIC
    blob += struct.pack("<II", VERSION, len(tensors))
    for name, arr in tensors.items():
        encoded = name.encode("utf-8")
        if len(encoded) > 0xFFFF:
            raise CheckpointError(f"tensor name too long: {name[:40]}...")
        if arr.dtype != np.float32:
            raise CheckpointError(
                f"tensor {name}: checkpoints store float32, got {arr.dtype}"
            )
        arr = np.ascontiguousarray(arr, dtype="<f4")
        blob += struct.pack("<H", len(encoded))
        blob += encoded
        blob += struct.pack("<B", arr.ndim)
        blob += struct.pack(f"<{arr.ndim}I", *arr.shape)
        blob += arr.tobytes()
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(os.path.abspath(path)),
                               prefix=".ckpt-")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(blob)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class _Reader:
    def __init__(self, data: bytes, path: str):
        self.data = data
        self.pos = 0
        self.path = path

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise CheckpointError(f"{self.path}: truncated checkpoint file")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def load_checkpoint(path: str) -> dict[str, np.ndarray]:
    """Read a checkpoint back as {name: float32 array}, file order."""
    try:
        with open(path, "rb") as f:
            data = f.read()
    except OSError as e:
        raise CheckpointError(f"cannot read checkpoint {path}: {e}") from e
    r = _Reader(data, path)
    if r.take(4) != MAGIC:
        raise CheckpointError(f"{path}: bad magic")
    version, count = r.unpack("<II")
    if version != VERSION:
        raise CheckpointError(f"{path}: unsupported version {version} "
                              f"(expected {VERSION})")
    tensors: dict[str, np.ndarray] = {}
    for _ in range(count):
        (name_len,) = r.unpack("<H")
        name = r.take(name_len).decode("utf-8")
        (ndim,) = r.unpack("<B")
        shape = r.unpack(f"<{ndim}I")
        n = int(np.prod(shape)) if shape else 1
        raw = r.take(4 * n)
        tensors[name] = np.frombuffer(raw, dtype="<f4").reshape(shape).copy()
    if r.pos != len(data):
        raise CheckpointError(f"{path}: {len(data) - r.pos} trailing bytes")
    return tensors


def save_model(model, path: str) -> None:
    save_checkpoint(dict(model.parameters()), path)


def load_model_weights(model, path: str) -> None:
    """Restore a model's named tensors; mismatches name the tensor."""
    tensors = load_checkpoint(path)
    expected = dict(model.parameters())
    for name, arr in expected.items():
        if name not in tensors:
            raise CheckpointError(f"{path}: missing tensor {name!r}")
        if tensors[name].shape != arr.shape:
            raise CheckpointError(
                f"{path}: tensor {name!r} has shape {tensors[name].shape}, "
                f"model expects {arr.shape}")
    extra = set(tensors) - set(expected)
    if extra:
        raise CheckpointError(f"{path}: unexpected tensors {sorted(extra)}")
    for name in expected:
        model.set_parameter(name, tensors[name])
