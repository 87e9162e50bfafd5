"""Match features relating a hypothesis vector to a reference vector.

For d-dimensional sentence vectors t and r, the feature vector is the
4d-dimensional concatenation [t ; r ; t*r ; |t - r|] (element-wise product
and absolute difference). Optional per-dimension standardization is fit on
training features only.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .embeddings import EmbeddingStore, hyp_key, ref_key
from .errors import EmbeddingFormatError, MissingKeysError, ValidationError

SCALE_FLOOR = 1e-12

STD1_MAGIC = b"STD1"
_STD_HEADER = struct.Struct("<4sI")


def match_features(t, r) -> np.ndarray:
    """Build [t ; r ; t*r ; |t-r|] as float64, whatever the input dtype."""
    t = np.asarray(t, dtype=np.float64)
    r = np.asarray(r, dtype=np.float64)
    if t.ndim != 1 or r.ndim != 1:
        raise ValidationError("match_features expects 1-D vectors")
    if t.shape != r.shape:
        raise ValidationError(f"vector length mismatch: {t.shape[0]} vs {r.shape[0]}")
    if t.size == 0:
        raise ValidationError("vectors must have at least one component")
    return np.concatenate([t, r, t * r, np.abs(t - r)])


def combined_permutation(dims: Sequence[int]) -> np.ndarray:
    """Index array mapping concatenated per-source features to combined features.

    If f_s = match_features(t_s, r_s) per source s and f_all = match_features
    over the source-concatenated vectors, then
    f_all == np.concatenate([f_1, .., f_n])[combined_permutation(dims)].
    """
    dims = [int(d) for d in dims]
    if not dims or any(d < 1 for d in dims):
        raise ValidationError("dims must be a non-empty list of positive ints")
    total = sum(dims)
    bases = np.cumsum([0] + [4 * d for d in dims[:-1]])
    perm = np.empty(4 * total, dtype=np.int64)
    for block in range(4):
        offset = 0
        for base, d in zip(bases, dims):
            perm[block * total + offset : block * total + offset + d] = np.arange(
                base + block * d, base + (block + 1) * d
            )
            offset += d
    return perm


@dataclass(frozen=True)
class Standardizer:
    """Per-dimension centering and scaling, with a floor on tiny scales."""

    mean: np.ndarray
    scale: np.ndarray

    def __post_init__(self):
        if self.mean.shape != self.scale.shape or self.mean.ndim != 1:
            raise ValidationError("mean and scale must be 1-D arrays of equal length")
        if np.any(self.scale < SCALE_FLOOR):
            raise ValidationError(f"every scale component must be >= {SCALE_FLOOR}")


def fit_standardizer(features) -> Standardizer:
    """Population mean and standard deviation per dimension.

    Dimensions whose standard deviation falls below SCALE_FLOOR get scale 1
    so constant columns pass through unchanged instead of exploding.
    """
    mat = np.asarray(features, dtype=np.float64)
    if mat.ndim != 2:
        raise ValidationError("expected a list of equal-length feature vectors")
    if mat.shape[0] < 2:
        raise ValidationError(f"need at least 2 feature vectors, got {mat.shape[0]}")
    mean = mat.mean(axis=0)
    scale = mat.std(axis=0)
    scale = np.where(scale < SCALE_FLOOR, 1.0, scale)
    return Standardizer(mean=mean, scale=scale)


def apply_standardizer(s: Standardizer, f) -> np.ndarray:
    """(f - mean) / scale, for one feature vector or a feature matrix."""
    arr = np.asarray(f, dtype=np.float64)
    if arr.shape[-1] != s.mean.shape[0]:
        raise ValidationError(
            f"feature length {arr.shape[-1]} does not match standardizer length {s.mean.shape[0]}"
        )
    return (arr - s.mean) / s.scale


def feature_matrix(store: EmbeddingStore, segment_ids: Sequence[str]) -> np.ndarray:
    """Stack match features for the given segment ids, in the given order.

    Fails with the full offender list if any hypothesis or reference vector
    is missing; silent defaults would corrupt correlations invisibly.
    """
    missing = []
    rows = []
    for seg_id in segment_ids:
        t = store.lookup(hyp_key(seg_id))
        r = store.lookup(ref_key(seg_id))
        if t is None:
            missing.append(hyp_key(seg_id))
        if r is None:
            missing.append(ref_key(seg_id))
        if t is not None and r is not None:
            rows.append(match_features(t, r))
    if missing:
        raise MissingKeysError(missing, context="embedding store")
    if not rows:
        raise ValidationError("no segment ids given")
    return np.vstack(rows)


def save_standardizer(s: Standardizer, path) -> None:
    """Write mean and scale as STD1: magic, u32 length, f64 mean, f64 scale."""
    n = s.mean.shape[0]
    payload = (
        _STD_HEADER.pack(STD1_MAGIC, n)
        + s.mean.astype("<f8").tobytes()
        + s.scale.astype("<f8").tobytes()
    )
    Path(path).write_bytes(payload)


def load_standardizer(path) -> Standardizer:
    path = Path(path)
    data = path.read_bytes()
    if len(data) < _STD_HEADER.size:
        raise EmbeddingFormatError(f"{path}: truncated standardizer header")
    magic, n = _STD_HEADER.unpack_from(data, 0)
    if magic != STD1_MAGIC:
        raise EmbeddingFormatError(f"{path}: bad magic {magic!r}, expected {STD1_MAGIC!r}")
    expected = _STD_HEADER.size + 16 * n
    if len(data) != expected:
        raise EmbeddingFormatError(f"{path}: expected {expected} bytes, found {len(data)}")
    mean = np.frombuffer(data, dtype="<f8", count=n, offset=_STD_HEADER.size).copy()
    scale = np.frombuffer(data, dtype="<f8", count=n, offset=_STD_HEADER.size + 8 * n).copy()
    return Standardizer(mean=mean, scale=scale)
