import shutil
import sys

import numpy as np
import pytest

from inds.features.frequency import spatial_radial_profile
from inds.perturb import (
    PerturbationError,
    TranscoderUnavailable,
    apply_perturbation,
    gaussian_kernel,
    perturb_blur,
    perturb_jpeg,
    perturb_noise,
    perturb_resize,
    read_ppm,
    write_ppm,
)

FAKE_TRANSCODER = (
    f"{sys.executable} -c "
    "\"import sys,shutil;shutil.copy(sys.argv[1],sys.argv[2])\" {input} {output}"
)


class TestBlur:
    def test_constant_frame_unchanged(self):
        frame = np.full((16, 16), 7.0)
        assert np.allclose(perturb_blur(frame, 1.0), frame)

    def test_impulse_matches_kernel_oracle(self):
        sigma = 1.0
        k = gaussian_kernel(sigma)
        n = 2 * len(k) + 5
        frame = np.zeros((n, n))
        c = n // 2
        frame[c, c] = 1.0
        out = perturb_blur(frame, sigma)
        oracle = np.outer(k, k)
        r = len(k) // 2
        assert np.allclose(out[c - r : c + r + 1, c - r : c + r + 1], oracle, atol=1e-6)

    def test_stronger_blur_removes_more_high_band(self):
        rng = np.random.default_rng(0)
        frame = rng.standard_normal((32, 32))

        def high_energy(f):
            spec = spatial_radial_profile(f)
            ring_e = spec.counts * spec.power
            r = np.arange(len(ring_e))
            return ring_e[r >= 2 * spec.max_ring / 3].sum()

        e1 = high_energy(perturb_blur(frame, 1.0))
        e2 = high_energy(perturb_blur(frame, 2.0))
        assert e2 < e1 < high_energy(frame)

    def test_kernel_mass(self):
        for sigma in (0.5, 1.0, 2.0):
            assert gaussian_kernel(sigma).sum() == pytest.approx(1.0)


class TestResize:
    def test_halving_box_means(self):
        frame = np.arange(16, dtype=float).reshape(4, 4)
        out = perturb_resize(frame, 0.5)
        assert out.shape == (2, 2)
        assert out[0, 0] == pytest.approx(frame[:2, :2].mean())
        assert out[1, 1] == pytest.approx(frame[2:, 2:].mean())

    def test_mean_preserved(self):
        rng = np.random.default_rng(1)
        frame = rng.standard_normal((12, 12))
        out = perturb_resize(frame, 0.5)
        assert out.mean() == pytest.approx(frame.mean())


class TestNoise:
    def test_seeded_deterministic(self):
        frame = np.zeros((8, 8))
        a = perturb_noise(frame, 0.5, seed=3)
        b = perturb_noise(frame, 0.5, seed=3)
        assert np.array_equal(a, b)


class TestPpm:
    def test_roundtrip(self, tmp_path):
        rng = np.random.default_rng(0)
        frame = np.rint(rng.uniform(0, 255, (6, 5, 3)))
        p = tmp_path / "f.ppm"
        write_ppm(p, frame)
        assert np.array_equal(read_ppm(p), frame)

    def test_grayscale_promoted(self, tmp_path):
        frame = np.full((4, 4), 128.0)
        p = tmp_path / "g.ppm"
        write_ppm(p, frame)
        assert read_ppm(p).shape == (4, 4, 3)

    def test_bad_magic(self, tmp_path):
        p = tmp_path / "bad.ppm"
        p.write_bytes(b"P5\n1 1\n255\n\x00")
        with pytest.raises(PerturbationError):
            read_ppm(p)


class TestJpegHook:
    def test_unconfigured_raises_skippable(self):
        with pytest.raises(TranscoderUnavailable):
            perturb_jpeg(np.zeros((4, 4, 3)), 95, None)

    def test_copy_transcoder_roundtrip(self):
        frame = np.full((8, 8, 3), 128.0)
        out = perturb_jpeg(frame, 100, FAKE_TRANSCODER)
        assert np.max(np.abs(out - frame)) <= 2.0

    def test_failing_transcoder(self):
        cmd = f"{sys.executable} -c \"import sys;sys.exit(9)\""
        with pytest.raises(PerturbationError, match="exited 9"):
            perturb_jpeg(np.zeros((4, 4, 3)), 90, cmd)

    @pytest.mark.skipif(shutil.which("ffmpeg") is None, reason="no ffmpeg installed")
    def test_real_jpeg_quality100_near_identity(self):
        cmd = (
            "ffmpeg -loglevel error -y -i {input} -q:v 1 /tmp/_indsq.jpg "
            "&& ffmpeg -loglevel error -y -i /tmp/_indsq.jpg {output}"
        )
        frame = np.full((16, 16, 3), 128.0)
        out = perturb_jpeg(frame, 100, f"sh -c '{cmd}'")
        assert np.max(np.abs(out - frame)) <= 2.0


class TestDispatch:
    def test_none_identity(self):
        frame = np.random.default_rng(0).standard_normal((4, 4))
        assert np.array_equal(apply_perturbation(frame, "none"), frame)

    def test_spec_strings(self):
        frame = np.random.default_rng(1).uniform(0, 255, (8, 8, 3))
        assert apply_perturbation(frame, "blur:1.0").shape == frame.shape
        assert apply_perturbation(frame, "resize:0.5").shape == (4, 4, 3)
        assert apply_perturbation(frame, "noise:0.1", seed=1).shape == frame.shape

    def test_unknown_rejected(self):
        with pytest.raises(PerturbationError):
            apply_perturbation(np.zeros((4, 4)), "sharpen:2")
