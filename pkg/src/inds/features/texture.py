"""Texture and dimensionality-reduction features on the keyframes.

Keyframes are the first, middle, and last difference frames (indices 0, 3,
6 of the 7). GLCMs use offset distance 1 at 0 and 90 degrees with
symmetric accumulation over 16 min-max gray levels; LBP uses the 8-neighbor
radius-1 code with ties mapping to bit 1; PCA operates on the 7 x (C*H*W)
matrix with z-scored columns and retains seven components, zero-padding
past the rank.
"""

from __future__ import annotations

import numpy as np

from ..sequence import Inds
from .common import channel_mean, pearson, summary_stats
from .registry import FeatureVector, from_pairs

GRAY_LEVELS = 16
KEYFRAMES = (0, 3, 6)
KEYFRAME_PAIRS = ((0, 3), (3, 6), (0, 6))
PCA_COMPONENTS = 7
SSIM_TILE = 8


def quantize(frame: np.ndarray, levels: int = GRAY_LEVELS) -> np.ndarray:
    """Min-max quantization to integer levels 0..levels-1; a zero-range
    frame maps to level 0."""
    lo, hi = float(frame.min()), float(frame.max())
    if hi == lo:
        return np.zeros(frame.shape, dtype=np.int64)
    q = np.floor((frame - lo) / (hi - lo) * levels).astype(np.int64)
    return np.clip(q, 0, levels - 1)


def glcm(quantized: np.ndarray, offset: tuple[int, int], levels: int = GRAY_LEVELS) -> np.ndarray:
    """Normalized symmetric co-occurrence matrix for one displacement
    (non-negative row/column offsets)."""
    dr, dc = offset
    h, w = quantized.shape
    a = quantized[: h - dr, : w - dc]
    b = quantized[dr:, dc:]
    m = np.zeros((levels, levels))
    np.add.at(m, (a.ravel(), b.ravel()), 1.0)
    m = m + m.T
    total = m.sum()
    return m / total if total > 0 else m


def glcm_stats(p: np.ndarray) -> dict[str, float]:
    i = np.arange(p.shape[0])[:, None]
    j = np.arange(p.shape[1])[None, :]
    diff = i - j
    return {
        "contrast": float((p * diff**2).sum()),
        "dissimilarity": float((p * np.abs(diff)).sum()),
        "homogeneity": float((p / (1.0 + diff**2)).sum()),
        "energy": float((p**2).sum()),
    }


def glcm_features(inds: Inds) -> FeatureVector:
    maps = channel_mean(inds.diffs)
    pairs: list[tuple[str, float]] = []
    for t in KEYFRAMES:
        q = quantize(maps[t])
        for angle, offset in (("0", (0, 1)), ("90", (1, 0))):
            stats = glcm_stats(glcm(q, offset))
            for name, val in stats.items():
                pairs.append((f"texture.glcm.t{t}.a{angle}.{name}", val))
    return from_pairs(pairs)


_LBP_OFFSETS = ((-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1))


def lbp_codes(frame: np.ndarray) -> np.ndarray:
    """8-neighbor LBP over interior pixels; neighbor >= center sets the bit."""
    center = frame[1:-1, 1:-1]
    codes = np.zeros(center.shape, dtype=np.int64)
    h, w = frame.shape
    for bit, (dr, dc) in enumerate(_LBP_OFFSETS):
        neighbor = frame[1 + dr : h - 1 + dr, 1 + dc : w - 1 + dc]
        codes |= (neighbor >= center).astype(np.int64) << bit
    return codes


def _uniform_mask() -> np.ndarray:
    mask = np.zeros(256, dtype=bool)
    for code in range(256):
        bits = [(code >> k) & 1 for k in range(8)]
        transitions = sum(bits[k] != bits[(k + 1) % 8] for k in range(8))
        mask[code] = transitions <= 2
    return mask


_UNIFORM = _uniform_mask()


def lbp_features(inds: Inds) -> FeatureVector:
    maps = channel_mean(inds.diffs)
    pairs: list[tuple[str, float]] = []
    for t in KEYFRAMES:
        codes = lbp_codes(maps[t])
        hist = np.bincount(codes.ravel(), minlength=256).astype(np.float64)
        hist /= hist.sum()
        nz = hist[hist > 0]
        pairs += [
            (f"texture.lbp.t{t}.entropy", float(-(nz * np.log2(nz)).sum())),
            (f"texture.lbp.t{t}.max_mass", float(hist.max())),
            (f"texture.lbp.t{t}.nonzero_bins", float((hist > 0).sum())),
            (f"texture.lbp.t{t}.uniform_mass", float(hist[_UNIFORM].sum())),
        ]
    return from_pairs(pairs)


def pca_scores(inds: Inds):
    """Component score vectors and explained-variance ratios of the z-scored
    time-by-space matrix, zero-padded to seven components."""
    d = inds.diffs
    t_len = d.shape[0]
    x = d.reshape(t_len, -1).astype(np.float64)
    mu = x.mean(axis=0)
    sd = x.std(axis=0)
    z = np.where(sd > 0, (x - mu) / np.where(sd > 0, sd, 1.0), 0.0)
    u, s, _ = np.linalg.svd(z, full_matrices=False)
    scores = np.zeros((PCA_COMPONENTS, t_len))
    ratios = np.zeros(PCA_COMPONENTS)
    total = float((s**2).sum())
    rank = min(len(s), PCA_COMPONENTS)
    for k in range(rank):
        scores[k] = u[:, k] * s[k]
        ratios[k] = (s[k] ** 2 / total) if total > 0 else 0.0
    return scores, ratios


def pca_features(inds: Inds) -> FeatureVector:
    scores, ratios = pca_scores(inds)
    pairs: list[tuple[str, float]] = []
    for k in range(PCA_COMPONENTS):
        stats = summary_stats(scores[k])
        for name in ("mean", "std", "variance", "max", "min", "median", "skewness", "kurtosis"):
            pairs.append((f"texture.pca.c{k}.{name}", stats[name]))
        pairs.append((f"texture.pca.c{k}.energy", float((scores[k] ** 2).sum())))
        pairs.append((f"texture.pca.c{k}.l1", float(np.abs(scores[k]).sum())))
        pairs.append((f"texture.pca.c{k}.evr", float(ratios[k])))
    return from_pairs(pairs)


def ssim(a: np.ndarray, b: np.ndarray, tile: int = SSIM_TILE) -> float:
    """Mean structural similarity over non-overlapping tiles.

    Stabilizers C1 = (0.01 L)^2 and C2 = (0.03 L)^2 with L the dynamic range
    pooled over both maps; a zero range means both maps are constant, giving
    1.0 when they are identical and 0.0 otherwise.
    """
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    span = float(max(a.max(), b.max()) - min(a.min(), b.min()))
    if span == 0:
        return 1.0 if np.array_equal(a, b) else 0.0
    c1 = (0.01 * span) ** 2
    c2 = (0.03 * span) ** 2
    h, w = a.shape
    step = tile if min(h, w) >= tile else min(h, w)
    vals = []
    for r in range(0, h - step + 1, step):
        for c in range(0, w - step + 1, step):
            ta = a[r : r + step, c : c + step]
            tb = b[r : r + step, c : c + step]
            mu_a, mu_b = ta.mean(), tb.mean()
            va, vb = ta.var(), tb.var()
            cov = ((ta - mu_a) * (tb - mu_b)).mean()
            vals.append(
                ((2 * mu_a * mu_b + c1) * (2 * cov + c2))
                / ((mu_a**2 + mu_b**2 + c1) * (va + vb + c2))
            )
    return float(np.mean(vals))


def keyframe_consistency_features(inds: Inds) -> FeatureVector:
    maps = channel_mean(inds.diffs)
    pairs: list[tuple[str, float]] = []
    for a, b in KEYFRAME_PAIRS:
        pairs.append((f"texture.consistency.pearson.t{a}t{b}", pearson(maps[a], maps[b])))
        pairs.append((f"texture.consistency.ssim.t{a}t{b}", ssim(maps[a], maps[b])))
    return from_pairs(pairs)
