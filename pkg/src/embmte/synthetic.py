"""Desk-scale synthetic corpora with embeddings that provably carry signal.

Each segment gets a random unit hypothesis vector t, a reference vector
r = normalize(t + perturbation), and a DA score exp(-||t - r||^2) plus
Gaussian noise, so an RBF-kernel regressor over match features can recover
the score. Segments are dealt round-robin over four language pairs within
one dataset tag, which is exactly the shape leave_one_pair_out_split wants.
"""

from __future__ import annotations

import numpy as np

from .corpus import DACorpus, LanguagePair, Segment
from .embeddings import EmbeddingStore, hyp_key, ref_key
from .errors import ValidationError

SYNTH_DATASET = "synth"
SYNTH_SYSTEM = "gen"
SYNTH_PAIRS = ("aa-en", "bb-en", "cc-en", "dd-en")


def generate(n: int, d: int, noise_sigma: float, seed: int) -> tuple[DACorpus, EmbeddingStore]:
    """Build an n-segment corpus and its d-dimensional embedding store.

    Deterministic for a given seed (PCG64). With noise_sigma = 0 the DA
    score is an exact function of the two stored float32 vectors.
    """
    if n < 10:
        raise ValidationError(f"need n >= 10 synthetic segments, got {n}")
    if d < 2:
        raise ValidationError(f"need dim >= 2, got {d}")
    if noise_sigma < 0:
        raise ValidationError(f"noise_sigma must be non-negative, got {noise_sigma}")

    rng = np.random.Generator(np.random.PCG64(seed))
    pairs = [LanguagePair.parse(p) for p in SYNTH_PAIRS]

    segments = []
    vectors: dict[str, np.ndarray] = {}
    width = len(str(n - 1))
    for i in range(n):
        t = rng.standard_normal(d)
        t /= np.linalg.norm(t)
        direction = rng.standard_normal(d)
        direction /= np.linalg.norm(direction)
        r = t + rng.uniform(0.0, 1.2) * direction
        r /= np.linalg.norm(r)

        # Score from the float32 values that actually reach the files.
        t32 = t.astype(np.float32)
        r32 = r.astype(np.float32)
        gap = np.asarray(t32, dtype=np.float64) - np.asarray(r32, dtype=np.float64)
        da = float(np.exp(-(gap @ gap))) + float(rng.normal(0.0, noise_sigma))

        pair = pairs[i % len(pairs)]
        seg_id = f"{SYNTH_DATASET}/{pair}/{SYNTH_SYSTEM}/{i:0{width}d}"
        segments.append(
            Segment(
                id=seg_id,
                pair=pair,
                dataset=SYNTH_DATASET,
                system=SYNTH_SYSTEM,
                hypothesis=f"synthetic hypothesis {seg_id}",
                reference=f"synthetic reference {seg_id}",
                da_score=da,
            )
        )
        vectors[hyp_key(seg_id)] = t32
        vectors[ref_key(seg_id)] = r32

    corpus = DACorpus(segments)
    store = EmbeddingStore(d, vectors, source_name="synthetic")
    return corpus, store
