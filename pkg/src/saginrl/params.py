"""Flat, shape-tagged float32 parameter sets and their binary wire format.

A ParamSet is an immutable ordered collection of float32 tensors. The
byte format below is the payload exchanged with the federation center,
so round-trips must be bit-exact:

    magic  b"NNPS"
    u16    version (currently 1)
    u16    tensor count
    u64    layout id (hash of the shape list)
    per tensor: u8 ndim, then u32 dims
    payload: little-endian float32, C order, tensors concatenated

All multi-byte header fields are big-endian.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

MAGIC = b"NNPS"
VERSION = 1


class WireFormatError(ValueError):
    """Raised on malformed or mismatched parameter payloads."""


@lru_cache(maxsize=None)
def layout_id_of(shapes: tuple[tuple[int, ...], ...]) -> int:
    """Stable 64-bit identifier of a shape list, identical across processes."""
    canon = ";".join(",".join(str(d) for d in s) for s in shapes)
    digest = hashlib.sha256(canon.encode("ascii")).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass(frozen=True)
class ParamSet:
    """Ordered, immutable float32 tensors of one function approximator."""

    tensors: tuple[np.ndarray, ...]
    layout_id: int = field(init=False)

    def __post_init__(self) -> None:
        frozen = []
        for t in self.tensors:
            arr = np.ascontiguousarray(t, dtype=np.float32)
            arr.flags.writeable = False
            frozen.append(arr)
        object.__setattr__(self, "tensors", tuple(frozen))
        object.__setattr__(self, "layout_id", layout_id_of(self.shapes))

    @property
    def shapes(self) -> tuple[tuple[int, ...], ...]:
        return tuple(t.shape for t in self.tensors)

    @property
    def size(self) -> int:
        return sum(t.size for t in self.tensors)

    def __iter__(self):
        return iter(self.tensors)

    def __len__(self) -> int:
        return len(self.tensors)

    def __getitem__(self, i: int) -> np.ndarray:
        return self.tensors[i]

    def map(self, fn) -> "ParamSet":
        """New ParamSet with ``fn`` applied to every tensor."""
        return ParamSet(tuple(fn(t) for t in self.tensors))

    def zip_map(self, other: "ParamSet", fn) -> "ParamSet":
        """New ParamSet with ``fn(a, b)`` applied tensor-wise."""
        if other.layout_id != self.layout_id:
            raise WireFormatError("layout mismatch in tensor-wise combine")
        return ParamSet(tuple(fn(a, b) for a, b in zip(self.tensors, other.tensors)))


def concat_paramsets(parts: list[ParamSet]) -> ParamSet:
    """Pack several ParamSets into one (used for full-model payloads)."""
    tensors: list[np.ndarray] = []
    for p in parts:
        tensors.extend(p.tensors)
    return ParamSet(tuple(tensors))


def split_paramset(ps: ParamSet, sizes: list[int]) -> list[ParamSet]:
    """Inverse of :func:`concat_paramsets` given the tensor count of each part."""
    if sum(sizes) != len(ps.tensors):
        raise WireFormatError("split sizes do not cover the ParamSet")
    out, at = [], 0
    for n in sizes:
        out.append(ParamSet(ps.tensors[at:at + n]))
        at += n
    return out


def serialize(ps: ParamSet) -> bytes:
    """Encode a ParamSet into the wire format above."""
    head = bytearray()
    head += MAGIC
    head += struct.pack(">HH", VERSION, len(ps.tensors))
    head += struct.pack(">Q", ps.layout_id)
    for t in ps.tensors:
        head += struct.pack(">B", t.ndim)
        head += struct.pack(f">{t.ndim}I", *t.shape)
    body = b"".join(np.ascontiguousarray(t, dtype="<f4").tobytes() for t in ps.tensors)
    return bytes(head) + body


def deserialize(data: bytes) -> ParamSet:
    """Decode wire bytes back into a ParamSet, validating every header field."""
    if len(data) < 16:
        raise WireFormatError("payload truncated before header")
    if data[:4] != MAGIC:
        raise WireFormatError("bad magic")
    version, count = struct.unpack(">HH", data[4:8])
    if version != VERSION:
        raise WireFormatError(f"unsupported version {version}")
    (layout_id,) = struct.unpack(">Q", data[8:16])
    at = 16
    shapes: list[tuple[int, ...]] = []
    for _ in range(count):
        if at + 1 > len(data):
            raise WireFormatError("payload truncated in shape table")
        ndim = data[at]
        at += 1
        need = 4 * ndim
        if at + need > len(data):
            raise WireFormatError("payload truncated in shape table")
        shapes.append(struct.unpack(f">{ndim}I", data[at:at + need]))
        at += need
    if layout_id != layout_id_of(tuple(shapes)):
        raise WireFormatError("layout id does not match shape table")
    tensors = []
    for shape in shapes:
        n = int(np.prod(shape)) if shape else 1
        need = 4 * n
        if at + need > len(data):
            raise WireFormatError("payload truncated in tensor data")
        arr = np.frombuffer(data[at:at + need], dtype="<f4").reshape(shape)
        tensors.append(arr)
        at += need
    if at != len(data):
        raise WireFormatError("trailing bytes after tensor data")
    return ParamSet(tuple(tensors))
