"""Binary model checkpoints.

Layout (all integers little-endian):
  magic   4 bytes  b"WSPC"
  version u32      currently 1
  cfg_len u64      length of the UTF-8 JSON config blob
  cfg     bytes    encoder config as JSON
  count   u32      number of tensors
  per tensor:
    name_len u16, name bytes (UTF-8)
    ndim     u8,  dims u32 * ndim
    payload  float32 little-endian, C order
Tensors are written in sorted-name order; loading and saving round-trips
float32 parameters bit-exactly.
"""

from __future__ import annotations

import json
import struct
from typing import BinaryIO

import numpy as np

from ..errors import ConfigError, DataError
from .config import EncoderConfig
from .encoder import ModelParams, _param_shapes

CHECKPOINT_MAGIC = b"WSPC"
CHECKPOINT_VERSION = 1

_HEAD = struct.Struct("<4sI")
_U64 = struct.Struct("<Q")
_U32 = struct.Struct("<I")
_U16 = struct.Struct("<H")
_U8 = struct.Struct("<B")


def save_checkpoint(params: ModelParams, path: str) -> None:
    if params.dtype != np.float32:
        raise ConfigError(
            f"checkpoints store float32 parameters; got {params.dtype}")
    with open(path, "wb") as fh:
        fh.write(_HEAD.pack(CHECKPOINT_MAGIC, CHECKPOINT_VERSION))
        blob = json.dumps(params.config.to_dict(), ensure_ascii=False,
                          sort_keys=True).encode("utf-8")
        fh.write(_U64.pack(len(blob)))
        fh.write(blob)
        names = sorted(params.tensors)
        fh.write(_U32.pack(len(names)))
        for name in names:
            arr = params.tensors[name]
            nb = name.encode("utf-8")
            fh.write(_U16.pack(len(nb)))
            fh.write(nb)
            fh.write(_U8.pack(arr.ndim))
            for dim in arr.shape:
                fh.write(_U32.pack(dim))
            fh.write(np.ascontiguousarray(arr, dtype="<f4").tobytes())


def _read_exact(fh: BinaryIO, n: int, path: str) -> bytes:
    buf = fh.read(n)
    if len(buf) != n:
        raise DataError(f"{path}: truncated checkpoint "
                        f"(wanted {n} bytes, got {len(buf)})")
    return buf


def load_checkpoint(path: str, expected_config: EncoderConfig | None = None) -> ModelParams:
    with open(path, "rb") as fh:
        magic, version = _HEAD.unpack(_read_exact(fh, _HEAD.size, path))
        if magic != CHECKPOINT_MAGIC:
            raise DataError(f"{path}: not a checkpoint file (bad magic {magic!r})")
        if version != CHECKPOINT_VERSION:
            raise DataError(
                f"{path}: checkpoint version {version} unsupported "
                f"(expected {CHECKPOINT_VERSION})")
        (cfg_len,) = _U64.unpack(_read_exact(fh, _U64.size, path))
        try:
            cfg_obj = json.loads(_read_exact(fh, cfg_len, path).decode("utf-8"))
            config = EncoderConfig.from_dict(cfg_obj)
        except (ValueError, TypeError) as err:
            raise DataError(f"{path}: invalid checkpoint config: {err}") from err
        if expected_config is not None:
            mismatched = [
                key for key in expected_config.to_dict()
                if expected_config.to_dict()[key] != config.to_dict()[key]]
            if mismatched:
                raise ConfigError(
                    f"{path}: checkpoint config differs from expected on "
                    f"fields: {', '.join(sorted(mismatched))}")
        (count,) = _U32.unpack(_read_exact(fh, _U32.size, path))
        tensors: dict[str, np.ndarray] = {}
        for _ in range(count):
            (name_len,) = _U16.unpack(_read_exact(fh, _U16.size, path))
            name = _read_exact(fh, name_len, path).decode("utf-8")
            (ndim,) = _U8.unpack(_read_exact(fh, _U8.size, path))
            shape = tuple(
                _U32.unpack(_read_exact(fh, _U32.size, path))[0]
                for _ in range(ndim))
            n_items = int(np.prod(shape, dtype=np.int64)) if shape else 1
            payload = _read_exact(fh, n_items * 4, path)
            arr = np.frombuffer(payload, dtype="<f4").reshape(shape)
            # frombuffer views are read-only; hand back an owned, writable copy
            tensors[name] = arr.astype(np.float32, copy=True)
        trailing = fh.read(1)
        if trailing:
            raise DataError(f"{path}: trailing bytes after checkpoint payload")

    expected = {name: shape for name, shape, _ in _param_shapes(config)}
    missing = sorted(set(expected) - set(tensors))
    extra = sorted(set(tensors) - set(expected))
    if missing or extra:
        raise DataError(
            f"{path}: tensor set mismatch (missing: {missing or 'none'}, "
            f"unexpected: {extra or 'none'})")
    for name, shape in expected.items():
        if tensors[name].shape != shape:
            raise DataError(
                f"{path}: tensor {name!r} has shape {tensors[name].shape}, "
                f"expected {shape}")
    return ModelParams(config, tensors)
