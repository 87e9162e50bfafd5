"""What the match-feature vector looks like and how multi-encoder
combination interacts with it.

For d-dimensional sentence vectors t (hypothesis) and r (reference), the
feature vector is the 4d concatenation [t ; r ; t*r ; |t-r|]. Combining two
encoders first and featurizing is the same as featurizing per encoder and
permuting, so nothing is lost by concatenating encoder outputs.
"""

import numpy as np

from embmte import EmbeddingStore, combine_sources, combined_permutation, match_features

t = np.array([1.0, 2.0])
r = np.array([3.0, 4.0])
print("t        =", t)
print("r        =", r)
print("features =", match_features(t, r))
print("          [ t ; r ; t*r ; |t-r| ]")
print()

# Two encoders over the same sentence pair, different dimensionalities.
rng = np.random.Generator(np.random.PCG64(0))
keys = ["seg#hyp", "seg#ref"]
small = EmbeddingStore(3, {k: rng.standard_normal(3).astype(np.float32) for k in keys},
                       source_name="small")
large = EmbeddingStore(5, {k: rng.standard_normal(5).astype(np.float32) for k in keys},
                       source_name="large")

combined = combine_sources([small, large])
print(f"combined store: dim {small.dim} + {large.dim} = {combined.dim}")

f_combined = match_features(combined.lookup("seg#hyp"), combined.lookup("seg#ref"))
f_per_source = np.concatenate([
    match_features(s.lookup("seg#hyp"), s.lookup("seg#ref")) for s in (small, large)
])
perm = combined_permutation([small.dim, large.dim])
print("combine-then-featurize == featurize-then-permute:",
      np.array_equal(f_combined, f_per_source[perm]))
