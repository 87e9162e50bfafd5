import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from embmte.embeddings import EmbeddingStore, combine_sources
from embmte.errors import MissingKeysError, ValidationError
from embmte.features import (
    Standardizer,
    apply_standardizer,
    combined_permutation,
    feature_matrix,
    fit_standardizer,
    load_standardizer,
    match_features,
    save_standardizer,
)

from oracles import mean_and_sd


class TestMatchFeatures:
    def test_pinned_example(self):
        out = match_features([1, 2], [3, 4])
        assert out.tolist() == [1, 2, 3, 4, 3, 8, 2, 2]
        assert out.dtype == np.float64

    def test_equal_vectors(self):
        out = match_features([5, -1], [5, -1])
        assert out[4:6].tolist() == [25, 1]
        assert out[6:8].tolist() == [0, 0]

    def test_skipthought_sized(self, rng):
        t = rng.standard_normal(4800)
        r = rng.standard_normal(4800)
        assert match_features(t, r).shape == (19200,)

    def test_length_mismatch(self):
        with pytest.raises(ValidationError):
            match_features([1, 2], [1, 2, 3])

    def test_empty_rejected(self):
        with pytest.raises(ValidationError):
            match_features([], [])

    @settings(max_examples=60, deadline=None)
    @given(
        arrays=hnp.arrays(
            np.float64,
            st.tuples(st.just(2), st.integers(1, 40)),
            elements=st.floats(-1e6, 1e6),
        )
    )
    def test_block_structure(self, arrays):
        t, r = arrays[0], arrays[1]
        d = t.shape[0]
        f = match_features(t, r)
        assert np.array_equal(f[:d], t)
        assert np.array_equal(f[d : 2 * d], r)
        assert np.array_equal(f[2 * d : 3 * d], t * r)
        assert np.array_equal(f[3 * d :], np.abs(t - r))
        assert f[3 * d :].min() >= 0.0

    def test_symmetry_swaps_first_blocks(self, rng):
        t = rng.standard_normal(9)
        r = rng.standard_normal(9)
        fwd = match_features(t, r)
        rev = match_features(r, t)
        d = 9
        assert np.array_equal(rev[:d], fwd[d : 2 * d])
        assert np.array_equal(rev[d : 2 * d], fwd[:d])
        assert np.array_equal(rev[2 * d :], fwd[2 * d :])


class TestCombinedPermutation:
    def test_matches_store_combination(self, rng):
        dims = [3, 5, 2]
        keys = ["s#hyp", "s#ref"]
        stores = [
            EmbeddingStore(d, {k: rng.standard_normal(d).astype(np.float32) for k in keys})
            for d in dims
        ]
        combined = combine_sources(stores)
        f_combined = match_features(combined.lookup("s#hyp"), combined.lookup("s#ref"))
        per_source = np.concatenate(
            [match_features(s.lookup("s#hyp"), s.lookup("s#ref")) for s in stores]
        )
        perm = combined_permutation(dims)
        assert np.array_equal(f_combined, per_source[perm])

    def test_permutation_is_a_bijection(self):
        perm = combined_permutation([4, 7])
        assert sorted(perm.tolist()) == list(range(44))

    def test_bad_dims(self):
        with pytest.raises(ValidationError):
            combined_permutation([])
        with pytest.raises(ValidationError):
            combined_permutation([3, 0])


class TestStandardizer:
    def test_two_vector_example(self):
        s = fit_standardizer([[0.0, 0.0], [2.0, 2.0]])
        assert s.mean.tolist() == [1.0, 1.0]
        assert s.scale.tolist() == [1.0, 1.0]

    def test_constant_column_floors_to_one(self, rng):
        mat = rng.standard_normal((10, 3))
        mat[:, 1] = 4.25
        s = fit_standardizer(mat)
        assert s.scale[1] == 1.0
        out = apply_standardizer(s, mat)
        assert np.allclose(out[:, 1], 0.0)

    def test_needs_two_vectors(self):
        with pytest.raises(ValidationError):
            fit_standardizer([[1.0, 2.0]])

    def test_standardized_moments_vs_independent_sums(self, rng):
        mat = rng.normal(3.0, 2.5, size=(100, 12))
        s = fit_standardizer(mat)
        out = apply_standardizer(s, mat)
        means, sds = mean_and_sd(out.tolist())
        assert max(abs(m) for m in means) < 1e-12
        assert max(abs(sd - 1.0) for sd in sds) < 1e-12

    def test_apply_at_mean_is_zero(self, rng):
        mat = rng.standard_normal((5, 4))
        s = fit_standardizer(mat)
        assert np.allclose(apply_standardizer(s, s.mean), 0.0)

    def test_identity_standardizer(self, rng):
        s = Standardizer(mean=np.zeros(6), scale=np.ones(6))
        f = rng.standard_normal(6)
        assert np.array_equal(apply_standardizer(s, f), f)

    def test_round_trip_inversion(self, rng):
        mat = rng.normal(0, 10, size=(30, 8))
        s = fit_standardizer(mat)
        f = rng.normal(0, 10, size=8)
        back = apply_standardizer(s, f) * s.scale + s.mean
        assert np.allclose(back, f, rtol=1e-12, atol=1e-12)

    def test_length_mismatch(self, rng):
        s = fit_standardizer(rng.standard_normal((4, 6)))
        with pytest.raises(ValidationError):
            apply_standardizer(s, np.zeros(5))

    def test_scale_floor_invariant(self):
        with pytest.raises(ValidationError):
            Standardizer(mean=np.zeros(2), scale=np.array([1.0, 0.0]))

    def test_file_round_trip(self, rng, tmp_path):
        s = fit_standardizer(rng.standard_normal((20, 9)))
        path = tmp_path / "s.std1"
        save_standardizer(s, path)
        loaded = load_standardizer(path)
        assert loaded.mean.tobytes() == s.mean.tobytes()
        assert loaded.scale.tobytes() == s.scale.tobytes()


class TestFeatureMatrix:
    def test_builds_in_order(self, rng):
        store = EmbeddingStore(
            3,
            {
                "a#hyp": rng.standard_normal(3).astype(np.float32),
                "a#ref": rng.standard_normal(3).astype(np.float32),
                "b#hyp": rng.standard_normal(3).astype(np.float32),
                "b#ref": rng.standard_normal(3).astype(np.float32),
            },
        )
        mat = feature_matrix(store, ["b", "a"])
        assert mat.shape == (2, 12)
        assert np.array_equal(mat[0], match_features(store.lookup("b#hyp"), store.lookup("b#ref")))

    def test_lists_all_missing_keys(self, rng):
        store = EmbeddingStore(3, {"a#hyp": np.zeros(3, dtype=np.float32)})
        with pytest.raises(MissingKeysError) as exc:
            feature_matrix(store, ["a", "b"])
        assert set(exc.value.missing) == {"a#ref", "b#hyp", "b#ref"}
