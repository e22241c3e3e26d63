"""Checkpoint archive: "PQCK" magic, u16 version, JSON config header,
JSON tensor index (name -> shape, offset), then little-endian f32 blobs.
Same state always serializes to the same bytes.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np
import torch

from ..errors import CorruptFeatureError
from .config import ModelConfig

MAGIC = b"PQCK"
VERSION = 1


def save_checkpoint(config: ModelConfig, state_dict: dict, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    header = json.dumps(config.to_dict(), sort_keys=True, separators=(",", ":")).encode()
    blobs = []
    index = {}
    offset = 0
    for name in sorted(state_dict):
        tensor = state_dict[name].detach().cpu().to(torch.float32).numpy()
        raw = np.ascontiguousarray(tensor, dtype="<f4").tobytes()
        index[name] = {"shape": list(tensor.shape), "offset": offset}
        blobs.append(raw)
        offset += len(raw)
    index_bytes = json.dumps(index, sort_keys=True, separators=(",", ":")).encode()

    with path.open("wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<H", VERSION))
        fh.write(struct.pack("<I", len(header)))
        fh.write(header)
        fh.write(struct.pack("<I", len(index_bytes)))
        fh.write(index_bytes)
        for raw in blobs:
            fh.write(raw)


def load_checkpoint(path: str | Path) -> tuple[ModelConfig, dict]:
    path = Path(path)
    blob = path.read_bytes()
    if blob[:4] != MAGIC:
        raise CorruptFeatureError(f"{path}: bad checkpoint magic {blob[:4]!r}", offset=0)
    (version,) = struct.unpack_from("<H", blob, 4)
    if version != VERSION:
        raise CorruptFeatureError(f"{path}: unsupported checkpoint version {version}", offset=4)
    (header_len,) = struct.unpack_from("<I", blob, 6)
    header_end = 10 + header_len
    config = ModelConfig.from_dict(json.loads(blob[10:header_end]))
    (index_len,) = struct.unpack_from("<I", blob, header_end)
    index_end = header_end + 4 + index_len
    index = json.loads(blob[header_end + 4 : index_end])

    state = {}
    for name, entry in index.items():
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        start = index_end + entry["offset"]
        end = start + count * 4
        if end > len(blob):
            raise CorruptFeatureError(f"{path}: truncated tensor {name}", offset=len(blob))
        arr = np.frombuffer(blob[start:end], dtype="<f4").reshape(shape)
        state[name] = torch.from_numpy(arr.copy())
    return config, state
