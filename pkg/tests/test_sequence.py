import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from inds.sequence import (
    EmptyVideoError,
    Inds,
    NoiseSequence,
    ShapeError,
    build_inds,
    sample_frame_indices,
    standardize_frame,
)


class TestSampleFrameIndices:
    def test_default_stride(self):
        assert sample_frame_indices(30, 8, 2) == [0, 2, 4, 6, 8, 10, 12, 14]

    def test_stride_one_fallback(self):
        assert sample_frame_indices(8, 8, 2) == [0, 1, 2, 3, 4, 5, 6, 7]

    def test_repeat_last_fill(self):
        assert sample_frame_indices(6, 8, 2) == [0, 1, 2, 3, 4, 5, 5, 5]

    def test_empty_video(self):
        with pytest.raises(EmptyVideoError):
            sample_frame_indices(0)

    @settings(max_examples=200, deadline=None)
    @given(
        st.integers(min_value=1, max_value=500),
        st.integers(min_value=1, max_value=16),
        st.integers(min_value=1, max_value=8),
    )
    def test_length_and_bounds(self, total, count, stride):
        idx = sample_frame_indices(total, count, stride)
        assert len(idx) == count
        assert all(0 <= i < total for i in idx)
        assert idx == sorted(idx)


class TestStandardizeFrame:
    def test_identity(self):
        f = np.random.default_rng(0).standard_normal((512, 512, 3))
        assert np.array_equal(standardize_frame(f, 512), f)

    def test_center_crop_constant(self):
        f = np.full((514, 514, 1), 7.0)
        out = standardize_frame(f, 512)
        assert out.shape == (512, 512, 1)
        assert np.all(out == 7.0)

    def test_symmetric_zero_pad(self):
        f = np.ones((510, 512))
        out = standardize_frame(f, 512)
        assert out.shape == (512, 512)
        assert np.all(out[0] == 0) and np.all(out[511] == 0)
        assert np.all(out[1:511] == 1)

    def test_odd_margin_split(self):
        f = np.arange(5, dtype=float)[:, None] * np.ones((1, 4))
        out = standardize_frame(f, 4)
        # 5 -> 4 rows: floor margin 0 on top, so rows 0..3 kept
        assert np.array_equal(out[:, 0], np.array([0.0, 1.0, 2.0, 3.0]))

    @settings(max_examples=60, deadline=None)
    @given(
        st.integers(min_value=1, max_value=16),
        st.integers(min_value=1, max_value=16),
        st.integers(min_value=16, max_value=24),
    )
    def test_pad_preserves_sum(self, h, w, target):
        rng = np.random.default_rng(h * 31 + w)
        f = rng.standard_normal((h, w))
        out = standardize_frame(f, target)
        assert out.shape == (target, target)
        assert np.isclose(out.sum(), f.sum())


class TestBuildInds:
    def test_identical_frames_zero_diffs(self):
        seq = NoiseSequence(np.ones((8, 4, 8, 8)))
        inds = build_inds(seq)
        assert inds.diffs.shape == (7, 4, 8, 8)
        assert np.all(inds.diffs == 0)

    def test_linear_ramp(self):
        frames = np.stack([t * np.ones((4, 8, 8)) for t in range(8)])
        inds = build_inds(NoiseSequence(frames))
        assert np.all(inds.diffs == 1.0)

    def test_output_length_seven(self):
        frames = np.random.default_rng(1).standard_normal((8, 4, 8, 8))
        assert build_inds(NoiseSequence(frames)).diffs.shape[0] == 7

    def test_linearity(self):
        rng = np.random.default_rng(2)
        f1 = rng.standard_normal((8, 4, 8, 8))
        f2 = rng.standard_normal((8, 4, 8, 8))
        a, b = 2.5, -1.25
        lhs = build_inds(NoiseSequence(a * f1 + b * f2)).diffs
        rhs = a * build_inds(NoiseSequence(f1)).diffs + b * build_inds(NoiseSequence(f2)).diffs
        assert np.allclose(lhs, rhs)

    def test_shape_validation(self):
        with pytest.raises(ShapeError):
            NoiseSequence(np.zeros((7, 4, 8, 8)))
        with pytest.raises(ShapeError):
            Inds(np.zeros((8, 4, 8, 8)))
