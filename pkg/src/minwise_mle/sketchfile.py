"""Binary sketch files (little-endian).

Layout::

    magic   4s   b"MHS1"
    version u8   1
    kind    u8   0 = full 64-bit minimums, 1 = b-bit
    b       u8   bits per value (0 for kind 0)
    -       u8   reserved, 0
    k       u32
    seed    u64
    f       u64
    payload      kind 0: k u64 values; kind 1: ceil(k*b/8) packed bytes
"""
from __future__ import annotations

import struct
from pathlib import Path
from typing import Union

import numpy as np

from .core import ValidationError
from .hashing import BBitSketch, MinwiseSketch, packed_size

MAGIC = b"MHS1"
VERSION = 1
KIND_FULL = 0
KIND_BBIT = 1
HEADER = struct.Struct("<4sBBBBIQQ")

Sketch = Union[MinwiseSketch, BBitSketch]


class SketchFormatError(ValidationError):
    pass


def to_bytes(sketch: Sketch) -> bytes:
    if isinstance(sketch, MinwiseSketch):
        head = HEADER.pack(MAGIC, VERSION, KIND_FULL, 0, 0, sketch.k, sketch.seed, sketch.f)
        return head + sketch.mins.astype("<u8").tobytes()
    if isinstance(sketch, BBitSketch):
        head = HEADER.pack(MAGIC, VERSION, KIND_BBIT, sketch.b, 0, sketch.k, sketch.seed, sketch.f)
        return head + sketch.packed
    raise TypeError(f"not a sketch: {type(sketch).__name__}")


def from_bytes(data: bytes) -> Sketch:
    if len(data) < HEADER.size:
        raise SketchFormatError("truncated header")
    magic, version, kind, b, _, k, seed, f = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise SketchFormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise SketchFormatError(f"unsupported version {version}")
    payload = data[HEADER.size:]
    if kind == KIND_FULL:
        if b != 0:
            raise SketchFormatError("full sketches must have b = 0")
        if len(payload) != 8 * k:
            raise SketchFormatError(f"expected {8 * k} payload bytes, got {len(payload)}")
        mins = np.frombuffer(payload, dtype="<u8").astype(np.uint64)
        return MinwiseSketch(f, seed, k, mins)
    if kind == KIND_BBIT:
        if not 1 <= b <= 64:
            raise SketchFormatError(f"invalid b = {b}")
        if len(payload) != packed_size(k, b):
            raise SketchFormatError(f"expected {packed_size(k, b)} payload bytes, got {len(payload)}")
        return BBitSketch(f, seed, k, b, payload)
    raise SketchFormatError(f"unknown sketch kind {kind}")


def write_sketch(path, sketch: Sketch) -> Path:
    path = Path(path)
    path.write_bytes(to_bytes(sketch))
    return path


def read_sketch(path) -> Sketch:
    return from_bytes(Path(path).read_bytes())
