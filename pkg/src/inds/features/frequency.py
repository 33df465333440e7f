"""Frequency-domain features: depth-spectrum analysis and wavelet multiscale.

The radial power profile of a 2-D map is

    P_radial(r) = (1 / N_r) * sum_{round(sqrt(u^2+v^2)) = r} |F(u, v)|^2

over the unnormalized DC-centered 2-D DFT, with N_r the ring population.
Band, peak, and consistency descriptors are derived from these profiles at
five uniformly placed time points; temporal spectra are taken at the four
corner sites and the center.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..dwt import wavedec1d, wavedec2d
from ..sequence import Inds
from .common import channel_mean, pearson, stat_pairs
from .registry import FeatureVector, from_pairs

RATIO_GUARD = 1e-12


@dataclass(frozen=True)
class RadialSpectrum:
    """Ring-averaged power and ring populations, ring index 0..R."""

    power: np.ndarray
    counts: np.ndarray

    @property
    def max_ring(self) -> int:
        return len(self.power) - 1

    def total_energy(self) -> float:
        return float((self.counts * self.power).sum())


@dataclass(frozen=True)
class WaveletConfig:
    bases: tuple[str, ...] = ("db4", "haar", "bior2.2")
    levels: int = 2
    temporal_grid_stride: int = 16
    spatial_time_stride: int = 2

    def __post_init__(self):
        if self.levels < 1 or self.temporal_grid_stride < 1 or self.spatial_time_stride < 1:
            raise ValueError("levels and strides must be >= 1")


def _centered_freqs(n: int) -> np.ndarray:
    return np.fft.fftshift(np.fft.fftfreq(n, d=1.0 / n)).round().astype(int)


def spatial_radial_profile(frame: np.ndarray) -> RadialSpectrum:
    frame = np.asarray(frame, dtype=np.float64)
    h, w = frame.shape
    mag2 = np.abs(np.fft.fftshift(np.fft.fft2(frame))) ** 2
    u = _centered_freqs(h)[:, None]
    v = _centered_freqs(w)[None, :]
    rings = np.rint(np.sqrt(u.astype(float) ** 2 + v.astype(float) ** 2)).astype(int)
    r_max = int(rings.max())
    counts = np.bincount(rings.ravel(), minlength=r_max + 1)
    sums = np.bincount(rings.ravel(), weights=mag2.ravel(), minlength=r_max + 1)
    power = np.where(counts > 0, sums / np.maximum(counts, 1), 0.0)
    return RadialSpectrum(power=power, counts=counts)


def band_features(spec: RadialSpectrum, prefix: str = "spectrum.band") -> FeatureVector:
    """Energy split over ring thirds of the maximum ring, plus band ratios."""
    r = np.arange(len(spec.power))
    r_max = spec.max_ring
    ring_energy = spec.counts * spec.power
    lo = float(ring_energy[r < r_max / 3].sum())
    mid = float(ring_energy[(r >= r_max / 3) & (r < 2 * r_max / 3)].sum())
    hi = float(ring_energy[r >= 2 * r_max / 3].sum())
    total = lo + mid + hi
    if total <= 0:
        props = (0.0, 0.0, 0.0)
        ratios = (0.0, 0.0, 0.0)
    else:
        props = (lo / total, mid / total, hi / total)
        ratios = (lo / (mid + RATIO_GUARD), mid / (hi + RATIO_GUARD), lo / (hi + RATIO_GUARD))
    return from_pairs(
        [
            (f"{prefix}.low_prop", props[0]),
            (f"{prefix}.mid_prop", props[1]),
            (f"{prefix}.high_prop", props[2]),
            (f"{prefix}.low_over_mid", ratios[0]),
            (f"{prefix}.mid_over_high", ratios[1]),
            (f"{prefix}.low_over_high", ratios[2]),
        ]
    )


def spectral_peak_features(spec: RadialSpectrum, prefix: str = "spectrum.peak") -> FeatureVector:
    """Interior local maxima of the radial profile; top-3 zero-padded so the
    output dimension is fixed."""
    p = spec.power
    peaks = [
        (int(r), float(p[r]))
        for r in range(1, len(p) - 1)
        if p[r] > p[r - 1] and p[r] > p[r + 1]
    ]
    peaks.sort(key=lambda t: (-t[1], t[0]))
    pairs = [(f"{prefix}.count", float(len(peaks)))]
    for k in range(3):
        pos, height = peaks[k] if k < len(peaks) else (0, 0.0)
        pairs.append((f"{prefix}.pos{k}", float(pos)))
        pairs.append((f"{prefix}.height{k}", height))
    return from_pairs(pairs)


def consistency_time_indices(t_len: int) -> list[int]:
    # fraction -> index by truncation; gives [0, 1, 3, 4, 6] for 7 diffs
    return [int(f * (t_len - 1)) for f in (0.0, 0.25, 0.5, 0.75, 1.0)]


def _site_coords(h: int, w: int) -> list[tuple[int, int]]:
    return [(0, 0), (0, w - 1), (h - 1, 0), (h - 1, w - 1), (h // 2, w // 2)]


def temporal_spectrum_features(inds: Inds) -> FeatureVector:
    maps = channel_mean(inds.diffs)
    t_len, h, w = maps.shape
    pairs: list[tuple[str, float]] = []
    for k, (r, c) in enumerate(_site_coords(h, w)):
        spec = np.abs(np.fft.fft(maps[:, r, c])) ** 2
        energy = float(spec.sum())
        nonzero = spec[1:]
        # roundoff in a pure-DC trajectory must not elect a dominant bin
        dominant = float(np.argmax(nonzero) + 1) if nonzero.max() > 1e-12 * energy else 0.0
        dc_frac = float(spec[0] / energy) if energy > 0 else 0.0
        pairs += [
            (f"spectrum.temporal.site{k}.energy", energy),
            (f"spectrum.temporal.site{k}.dominant", dominant),
            (f"spectrum.temporal.site{k}.dc_frac", dc_frac),
        ]
    return from_pairs(pairs)


def spectral_consistency_features(inds: Inds) -> FeatureVector:
    maps = channel_mean(inds.diffs)
    idx = consistency_time_indices(maps.shape[0])
    profiles = [spatial_radial_profile(maps[i]).power for i in idx]
    rs = [pearson(profiles[k], profiles[k + 1]) for k in range(len(profiles) - 1)]
    pairs = [(f"spectrum.consistency.r{k}", rs[k]) for k in range(len(rs))]
    pairs += stat_pairs("spectrum.consistency", rs)
    return from_pairs(pairs)


def spatial_spectrum_features(inds: Inds) -> FeatureVector:
    """Band and peak descriptors of the radial profiles at the five sampled
    time points."""
    maps = channel_mean(inds.diffs)
    parts: list[tuple[str, float]] = []
    for i in consistency_time_indices(maps.shape[0]):
        spec = spatial_radial_profile(maps[i])
        for fv in (
            band_features(spec, prefix=f"spectrum.band.t{i}"),
            spectral_peak_features(spec, prefix=f"spectrum.peak.t{i}"),
        ):
            parts.extend(zip(fv.names, fv.values.tolist()))
    return from_pairs(parts)


def _subband_stats(prefix: str, coeffs: np.ndarray) -> list[tuple[str, float]]:
    if coeffs.size == 0:
        return [(f"{prefix}.energy", 0.0), (f"{prefix}.mean_abs", 0.0), (f"{prefix}.std", 0.0)]
    return [
        (f"{prefix}.energy", float((coeffs**2).sum())),
        (f"{prefix}.mean_abs", float(np.abs(coeffs).mean())),
        (f"{prefix}.std", float(coeffs.std())),
    ]


def wavelet_features(inds: Inds, cfg: WaveletConfig = WaveletConfig()) -> FeatureVector:
    maps = channel_mean(inds.diffs)
    t_len, h, w = maps.shape
    pairs: list[tuple[str, float]] = []

    sites = [(r, c) for r in range(0, h, cfg.temporal_grid_stride)
             for c in range(0, w, cfg.temporal_grid_stride)]
    frame_idx = list(range(0, t_len, cfg.spatial_time_stride))

    for basis in cfg.bases:
        # temporal pathway: per-site trajectories, coefficients pooled over sites
        per_level_details: list[list[np.ndarray]] = [[] for _ in range(cfg.levels)]
        approxes: list[np.ndarray] = []
        site_detail_energy = []
        for r, c in sites:
            details, approx, done = wavedec1d(maps[:, r, c], basis, cfg.levels, mode="symmetric")
            for lvl in range(done):
                per_level_details[lvl].append(details[lvl])
            approxes.append(approx)
            site_detail_energy.append(sum(float((d**2).sum()) for d in details))
        for lvl in range(cfg.levels):
            coeffs = (
                np.concatenate(per_level_details[lvl]) if per_level_details[lvl] else np.zeros(0)
            )
            pairs += _subband_stats(f"wavelet.temporal.{basis}.l{lvl + 1}.detail", coeffs)
        pairs += _subband_stats(f"wavelet.temporal.{basis}.approx", np.concatenate(approxes))

        # spatial pathway: 2-D transform of every second difference frame
        level_bands: list[dict[str, list[np.ndarray]]] = [
            {"lh": [], "hl": [], "hh": []} for _ in range(cfg.levels)
        ]
        lls: list[np.ndarray] = []
        frame_detail_energy = []
        for i in frame_idx:
            bands, ll, done = wavedec2d(maps[i], basis, cfg.levels, mode="periodization")
            tot = 0.0
            for lvl in range(done):
                lh, hl, hh = bands[lvl]
                level_bands[lvl]["lh"].append(lh.ravel())
                level_bands[lvl]["hl"].append(hl.ravel())
                level_bands[lvl]["hh"].append(hh.ravel())
                tot += float((lh**2).sum() + (hl**2).sum() + (hh**2).sum())
            lls.append(ll.ravel())
            frame_detail_energy.append(tot)
        for lvl in range(cfg.levels):
            for name in ("lh", "hl", "hh"):
                coeffs = (
                    np.concatenate(level_bands[lvl][name]) if level_bands[lvl][name] else np.zeros(0)
                )
                pairs += _subband_stats(f"wavelet.spatial.{basis}.l{lvl + 1}.{name}", coeffs)
        pairs += _subband_stats(f"wavelet.spatial.{basis}.ll", np.concatenate(lls))

        # fused temporal/spatial coupling, both series resampled to a common length
        fused = _fused_correlation(site_detail_energy, frame_detail_energy)
        pairs.append((f"wavelet.fused.{basis}", fused))

    return from_pairs(pairs)


def _fused_correlation(series_a, series_b) -> float:
    a = np.asarray(series_a, dtype=np.float64)
    b = np.asarray(series_b, dtype=np.float64)
    if len(a) < 2 or len(b) < 2:
        return 0.0
    m = min(len(a), len(b))
    grid = np.linspace(0.0, 1.0, m)
    ra = np.interp(grid, np.linspace(0.0, 1.0, len(a)), a)
    rb = np.interp(grid, np.linspace(0.0, 1.0, len(b)), b)
    return pearson(ra, rb)
