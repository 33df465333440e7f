import numpy as np
import pytest

from inds.features.registry import FeatureVector, concat, from_pairs, impute_invalid


class TestFeatureVector:
    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            FeatureVector(["a", "b"], np.zeros(3))

    def test_duplicate_names_rejected(self):
        with pytest.raises(ValueError, match="duplicate"):
            FeatureVector(["a", "a"], np.zeros(2))

    def test_concat_preserves_order(self):
        fv = concat([from_pairs([("a", 1.0)]), from_pairs([("b", 2.0), ("c", 3.0)])])
        assert fv.names == ["a", "b", "c"]
        assert fv.as_dict() == {"a": 1.0, "b": 2.0, "c": 3.0}

    def test_concat_detects_cross_part_duplicates(self):
        with pytest.raises(ValueError):
            concat([from_pairs([("a", 1.0)]), from_pairs([("a", 2.0)])])


class TestImputeInvalid:
    def test_median_policy(self):
        fv = from_pairs([("a", 1.0), ("b", np.nan), ("c", 3.0)])
        out = impute_invalid(fv, "median")
        assert out.values.tolist() == [1.0, 2.0, 3.0]

    def test_zero_policy(self):
        fv = from_pairs([("a", np.nan), ("b", np.inf)])
        out = impute_invalid(fv, "zero")
        assert out.values.tolist() == [0.0, 0.0]

    def test_all_finite_unchanged(self):
        fv = from_pairs([("a", 1.5), ("b", -2.5)])
        out = impute_invalid(fv, "median")
        assert out.values.tolist() == [1.5, -2.5]
        assert out is not fv  # no aliasing of the input

    def test_no_finite_entries_median_zero(self):
        fv = from_pairs([("a", np.nan), ("b", -np.inf)])
        out = impute_invalid(fv, "median")
        assert out.values.tolist() == [0.0, 0.0]

    def test_unknown_policy(self):
        with pytest.raises(ValueError):
            impute_invalid(from_pairs([("a", 1.0)]), "mean")
