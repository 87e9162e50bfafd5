"""Fixed-dimension sentence vector stores and the EMB1 binary file format.

EMB1 layout, little-endian, no padding:

    magic  b"EMB1"
    u32    dim
    u32    count
    count records of:  u32 key byte-length | UTF-8 key bytes | dim x f32

Vectors are stored as 32-bit floats; downstream feature arithmetic promotes
to 64-bit. A missing key is a value (None), never a default vector.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Optional

import numpy as np

from .errors import EmbeddingFormatError, MissingKeysError, ValidationError

EMB1_MAGIC = b"EMB1"
_HEADER = struct.Struct("<4sII")
_KEYLEN = struct.Struct("<I")

HYP_SIDE = "hyp"
REF_SIDE = "ref"


@dataclass(frozen=True)
class EmbeddingKey:
    """A segment-side key, serialized as ``<segment_id>#hyp`` or ``#ref``."""

    segment_id: str
    side: str

    def __post_init__(self):
        if self.side not in (HYP_SIDE, REF_SIDE):
            raise ValidationError(f"side must be {HYP_SIDE!r} or {REF_SIDE!r}, got {self.side!r}")

    def __str__(self) -> str:
        return f"{self.segment_id}#{self.side}"


def hyp_key(segment_id: str) -> str:
    return f"{segment_id}#{HYP_SIDE}"


def ref_key(segment_id: str) -> str:
    return f"{segment_id}#{REF_SIDE}"


class EmbeddingStore:
    """Immutable map from key strings to float32 vectors of one fixed dim."""

    def __init__(self, dim: int, vectors: Mapping[str, np.ndarray], source_name: str = ""):
        if dim < 1:
            raise ValidationError(f"embedding dim must be positive, got {dim}")
        self.dim = int(dim)
        self.source_name = source_name
        store: dict[str, np.ndarray] = {}
        for key, vec in vectors.items():
            arr = np.asarray(vec, dtype=np.float32)
            if arr.shape != (self.dim,):
                raise ValidationError(
                    f"vector for key {key!r} has shape {arr.shape}, expected ({self.dim},)"
                )
            if not np.all(np.isfinite(arr)):
                raise ValidationError(f"vector for key {key!r} has non-finite components")
            arr = arr.copy()
            arr.setflags(write=False)
            store[key] = arr
        self._vectors = store

    def __len__(self) -> int:
        return len(self._vectors)

    def __contains__(self, key) -> bool:
        return str(key) in self._vectors

    def keys(self):
        return self._vectors.keys()

    def lookup(self, key) -> Optional[np.ndarray]:
        """Return the stored vector for `key` (str or EmbeddingKey), or None."""
        return self._vectors.get(str(key))


def load_embeddings(path, source_name: str | None = None) -> EmbeddingStore:
    """Load an EMB1 file, failing fast on any structural defect."""
    path = Path(path)
    data = path.read_bytes()
    if len(data) < _HEADER.size:
        raise EmbeddingFormatError(f"{path}: truncated header ({len(data)} bytes)")
    magic, dim, count = _HEADER.unpack_from(data, 0)
    if magic != EMB1_MAGIC:
        raise EmbeddingFormatError(f"{path}: bad magic {magic!r}, expected {EMB1_MAGIC!r}")
    if dim < 1:
        raise EmbeddingFormatError(f"{path}: declared dim must be positive, got {dim}")

    offset = _HEADER.size
    rec_bytes = 4 * dim
    vectors: dict[str, np.ndarray] = {}
    for rec in range(count):
        if offset + _KEYLEN.size > len(data):
            raise EmbeddingFormatError(f"{path}: record {rec}: truncated before key length")
        (key_len,) = _KEYLEN.unpack_from(data, offset)
        offset += _KEYLEN.size
        if offset + key_len + rec_bytes > len(data):
            raise EmbeddingFormatError(
                f"{path}: record {rec}: truncated (dim mismatch or short file)"
            )
        try:
            key = data[offset : offset + key_len].decode("utf-8")
        except UnicodeDecodeError:
            raise EmbeddingFormatError(f"{path}: record {rec}: key is not valid UTF-8") from None
        offset += key_len
        vec = np.frombuffer(data, dtype="<f4", count=dim, offset=offset).astype(
            np.float32, copy=True
        )
        offset += rec_bytes
        if key in vectors:
            raise EmbeddingFormatError(f"{path}: duplicate key {key!r}")
        if not np.all(np.isfinite(vec)):
            raise EmbeddingFormatError(f"{path}: record for key {key!r} has non-finite components")
        vectors[key] = vec
    if offset != len(data):
        raise EmbeddingFormatError(
            f"{path}: {len(data) - offset} trailing byte(s) after {count} declared records"
        )
    return EmbeddingStore(dim, vectors, source_name=source_name or path.stem)


def save_embeddings(store: EmbeddingStore, path) -> None:
    """Write a store as EMB1; load_embeddings round-trips it bitwise."""
    chunks = [_HEADER.pack(EMB1_MAGIC, store.dim, len(store))]
    for key in store.keys():
        key_bytes = key.encode("utf-8")
        chunks.append(_KEYLEN.pack(len(key_bytes)))
        chunks.append(key_bytes)
        chunks.append(store.lookup(key).astype("<f4").tobytes())
    Path(path).write_bytes(b"".join(chunks))


def combine_sources(stores: Iterable[EmbeddingStore]) -> EmbeddingStore:
    """Concatenate per-source vectors key-wise, in the given store order.

    All stores must cover exactly the same key set. The combined dim is the
    sum of per-source dims, so match features built from a combined vector
    are a fixed permutation of concatenated per-source match features (see
    features.combined_permutation).
    """
    stores = list(stores)
    if not stores:
        raise ValidationError("combine_sources needs at least one store")
    if len(stores) == 1:
        only = stores[0]
        return EmbeddingStore(
            only.dim, {k: only.lookup(k) for k in only.keys()}, source_name=only.source_name
        )

    base_keys = set(stores[0].keys())
    for other in stores[1:]:
        other_keys = set(other.keys())
        if other_keys != base_keys:
            missing = base_keys - other_keys
            extra = other_keys - base_keys
            parts = []
            if missing:
                parts.append(f"absent from {other.source_name or 'store'}: "
                             + ", ".join(sorted(missing)[:10]))
            if extra:
                parts.append(f"unexpected in {other.source_name or 'store'}: "
                             + ", ".join(sorted(extra)[:10]))
            raise MissingKeysError(missing | extra, context="; ".join(parts))

    dim = sum(s.dim for s in stores)
    combined = {
        key: np.concatenate([s.lookup(key) for s in stores]) for key in stores[0].keys()
    }
    name = "+".join(s.source_name or "unnamed" for s in stores)
    return EmbeddingStore(dim, combined, source_name=name)
