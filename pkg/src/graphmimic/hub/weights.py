"""Binary weight checkpoints: magic 'GMIM', JSON header, float32 blobs, CRC.

Layout: magic(4) | version u32 | crc u32 | header_len u32 | header JSON |
payload. The CRC covers header and payload; loads refuse bad magic,
unknown versions, and checksum mismatches. save -> load -> save is
byte-identical.
"""

from __future__ import annotations

import json
import struct
import zlib

import numpy as np

from ..numerics import Tensor
from ..policy import GnnConfig, PolicyParams

MAGIC = b"GMIM"
VERSION = 1


def save_weights(params: PolicyParams, path: str) -> None:
    names = list(params.tensors)
    header = {
        "architecture": params.config.architecture,
        "config": params.config.to_json(),
        "tensors": [
            {"name": n, "shape": list(params.tensors[n].shape)} for n in names
        ],
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    payload = b"".join(
        np.ascontiguousarray(params.tensors[n].data, dtype="<f4").tobytes() for n in names
    )
    crc = zlib.crc32(header_bytes + payload) & 0xFFFFFFFF
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<III", VERSION, crc, len(header_bytes)))
        fh.write(header_bytes)
        fh.write(payload)


def load_weights(path: str) -> PolicyParams:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != MAGIC:
        raise ValueError(f"{path} is not a graphmimic weight file")
    version, crc, header_len = struct.unpack("<III", blob[4:16])
    if version != VERSION:
        raise ValueError(f"unsupported weight file version {version} (expected {VERSION})")
    header_bytes = blob[16 : 16 + header_len]
    payload = blob[16 + header_len :]
    if zlib.crc32(header_bytes + payload) & 0xFFFFFFFF != crc:
        raise ValueError(f"{path} failed its integrity check")
    header = json.loads(header_bytes)
    config = GnnConfig.from_json(header["config"])
    params = PolicyParams(config=config)
    offset = 0
    for entry in header["tensors"]:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        arr = np.frombuffer(payload, dtype="<f4", count=count, offset=offset).reshape(shape)
        params.tensors[entry["name"]] = Tensor(arr.copy(), requires_grad=True)
        offset += count * 4
    if offset != len(payload):
        raise ValueError(f"{path} payload length does not match its header")
    return params
