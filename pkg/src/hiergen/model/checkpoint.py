"""Binary checkpoints with a bit-exact round trip.

Layout: magic "HGCK", format version (u32 LE), a length-prefixed key=value
text block (model config, training step, extra metadata), then per-tensor
records: length-prefixed name, precision tag ("f32"/"f64"), rank, dims, and
little-endian row-major values.
"""

from __future__ import annotations

import struct
from typing import BinaryIO

import numpy as np

from ..errors import CorruptCheckpoint, IncompatibleCheckpoint
from .seq2seq import ModelConfig, Seq2SeqModel

MAGIC = b"HGCK"
VERSION = 1

_TAGS = {"f32": np.dtype("<f4"), "f64": np.dtype("<f8")}
_DTYPE_TO_TAG = {np.dtype(np.float32): "f32", np.dtype(np.float64): "f64"}


def _write_u32(f: BinaryIO, value: int) -> None:
    f.write(struct.pack("<I", value))


def _write_bytes(f: BinaryIO, data: bytes) -> None:
    _write_u32(f, len(data))
    f.write(data)


def _read_exact(f: BinaryIO, n: int) -> bytes:
    data = f.read(n)
    if len(data) != n:
        raise CorruptCheckpoint(f"expected {n} bytes, got {len(data)}")
    return data


def _read_u32(f: BinaryIO) -> int:
    return struct.unpack("<I", _read_exact(f, 4))[0]


def _read_bytes(f: BinaryIO) -> bytes:
    return _read_exact(f, _read_u32(f))


def save_checkpoint(model: Seq2SeqModel, path: str) -> None:
    entries = dict(model.config.to_dict())
    entries["step"] = str(model.step)
    entries.update(model.meta)
    config_text = "".join(f"{k}={v}\n" for k, v in entries.items())

    params = model.named_parameters()
    with open(path, "wb") as f:
        f.write(MAGIC)
        _write_u32(f, VERSION)
        _write_bytes(f, config_text.encode("utf-8"))
        _write_u32(f, len(params))
        for name, p in params.items():
            tag = _DTYPE_TO_TAG[np.dtype(p.data.dtype)]
            _write_bytes(f, name.encode("utf-8"))
            _write_bytes(f, tag.encode("ascii"))
            _write_u32(f, p.data.ndim)
            for dim in p.data.shape:
                _write_u32(f, dim)
            f.write(np.ascontiguousarray(p.data, dtype=_TAGS[tag]).tobytes())


def load_checkpoint(path: str) -> Seq2SeqModel:
    with open(path, "rb") as f:
        if _read_exact(f, 4) != MAGIC:
            raise CorruptCheckpoint("bad magic bytes")
        version = _read_u32(f)
        if version != VERSION:
            raise IncompatibleCheckpoint(f"format version {version}, expected {VERSION}")
        entries: dict[str, str] = {}
        for line in _read_bytes(f).decode("utf-8").splitlines():
            if line:
                key, _, value = line.partition("=")
                entries[key] = value
        config_keys = set(ModelConfig(1, 1).to_dict())
        config = ModelConfig.from_dict({k: v for k, v in entries.items()
                                        if k in config_keys})
        tensors: dict[str, np.ndarray] = {}
        dtype = np.float32
        count = _read_u32(f)
        for _ in range(count):
            name = _read_bytes(f).decode("utf-8")
            tag = _read_bytes(f).decode("ascii")
            if tag not in _TAGS:
                raise CorruptCheckpoint(f"unknown precision tag {tag!r}")
            rank = _read_u32(f)
            shape = tuple(_read_u32(f) for _ in range(rank))
            n_bytes = int(np.prod(shape, dtype=np.int64)) * _TAGS[tag].itemsize
            data = np.frombuffer(_read_exact(f, n_bytes), dtype=_TAGS[tag])
            tensors[name] = data.reshape(shape)
            dtype = _TAGS[tag].newbyteorder("=").type

    model = Seq2SeqModel(config, dtype=dtype)
    model.step = int(entries.get("step", "0"))
    model.meta = {k: v for k, v in entries.items()
                  if k not in config_keys and k != "step"}
    params = model.named_parameters()
    if set(params) != set(tensors):
        raise CorruptCheckpoint("tensor names do not match the model architecture")
    for name, p in params.items():
        loaded = tensors[name]
        if loaded.shape != p.data.shape:
            raise CorruptCheckpoint(f"tensor {name} has shape {loaded.shape}, "
                                    f"expected {p.data.shape}")
        p.data = np.ascontiguousarray(loaded, dtype=model.dtype)
    return model
