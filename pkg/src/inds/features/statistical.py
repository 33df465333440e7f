"""Statistical-domain features: higher moments, L-moments, local
variability, and Sobel edge dynamics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..sequence import Inds
from .common import channel_mean, histogram_entropy, pearson, stat_pairs
from .registry import FeatureVector, from_pairs

MOMENT_ORDERS = (3, 4, 5, 6)
WINDOW = 8
ENTROPY_BINS = 16

SOBEL_X = np.array([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]])
SOBEL_Y = SOBEL_X.T


@dataclass(frozen=True)
class LMomentSet:
    l1: float
    l2: float
    t3: float
    t4: float


def standardized_moments(x) -> dict[int, float]:
    """Population central moments of orders 3-6, standardized by sigma^k;
    all 0 for a constant sample."""
    x = np.asarray(x, dtype=np.float64).ravel()
    centered = x - x.mean()
    sigma = float(np.sqrt(np.mean(centered**2)))
    if sigma == 0:
        return {k: 0.0 for k in MOMENT_ORDERS}
    z = centered / sigma
    return {k: float(np.mean(z**k)) for k in MOMENT_ORDERS}


def l_moments(sample) -> LMomentSet:
    """Sample L-moments via probability-weighted moments of the sorted data.

    b_r = (1/n) * sum_j [ (j-1)...(j-r) / ((n-1)...(n-r)) ] x_(j), then
    l1 = b0, l2 = 2 b1 - b0, l3 = 6 b2 - 6 b1 + b0,
    l4 = 20 b3 - 30 b2 + 12 b1 - b0. Ratios are 0 when l2 = 0.
    """
    x = np.sort(np.asarray(sample, dtype=np.float64).ravel())
    n = x.size
    if n < 4:
        raise ValueError("need at least 4 samples for L-moments")
    j = np.arange(1, n + 1, dtype=np.float64)
    b0 = x.mean()
    b1 = float((((j - 1) / (n - 1)) * x).mean())
    b2 = float((((j - 1) * (j - 2) / ((n - 1) * (n - 2))) * x).mean())
    b3 = float((((j - 1) * (j - 2) * (j - 3) / ((n - 1) * (n - 2) * (n - 3))) * x).mean())
    l1 = float(b0)
    l2 = 2 * b1 - b0
    l3 = 6 * b2 - 6 * b1 + b0
    l4 = 20 * b3 - 30 * b2 + 12 * b1 - b0
    if l2 == 0:
        return LMomentSet(l1, 0.0, 0.0, 0.0)
    return LMomentSet(l1, float(l2), float(l3 / l2), float(l4 / l2))


def higher_moment_features(inds: Inds) -> FeatureVector:
    d = inds.diffs
    pairs: list[tuple[str, float]] = []
    pooled = standardized_moments(d)
    pairs += [(f"histat.global.m{k}", pooled[k]) for k in MOMENT_ORDERS]
    per_frame = [standardized_moments(d[t]) for t in range(d.shape[0])]
    for k in MOMENT_ORDERS:
        pairs += stat_pairs(f"histat.frame.m{k}", [m[k] for m in per_frame])
    for c in range(d.shape[1]):
        ch = standardized_moments(d[:, c])
        pairs += [(f"histat.channel.c{c}.m{k}", ch[k]) for k in MOMENT_ORDERS]
    return from_pairs(pairs)


def lmoment_features(inds: Inds) -> FeatureVector:
    d = inds.diffs
    pairs: list[tuple[str, float]] = []
    g = l_moments(d)
    pairs += [
        ("histat.lmom.global.l1", g.l1),
        ("histat.lmom.global.l2", g.l2),
        ("histat.lmom.global.t3", g.t3),
        ("histat.lmom.global.t4", g.t4),
    ]
    per_frame = [l_moments(d[t]) for t in range(d.shape[0])]
    for attr in ("l1", "l2", "t3", "t4"):
        pairs += stat_pairs(f"histat.lmom.frame.{attr}", [getattr(m, attr) for m in per_frame])
    return from_pairs(pairs)


def _windows(frame: np.ndarray):
    h, w = frame.shape
    if h < WINDOW or w < WINDOW:
        yield frame
        return
    for r in range(0, h - WINDOW + 1, WINDOW):
        for c in range(0, w - WINDOW + 1, WINDOW):
            yield frame[r : r + WINDOW, c : c + WINDOW]


def local_variability_features(inds: Inds) -> FeatureVector:
    maps = channel_mean(inds.diffs)
    var_per_frame = []
    ent_per_frame = []
    for t in range(maps.shape[0]):
        wins = list(_windows(maps[t]))
        var_per_frame.append(float(np.mean([w.var() for w in wins])))
        ent_per_frame.append(float(np.mean([histogram_entropy(w, ENTROPY_BINS) for w in wins])))
    pairs = stat_pairs("localvar.window_variance", var_per_frame)
    pairs += stat_pairs("localvar.window_entropy", ent_per_frame)
    pairs += stat_pairs("localvar.temporal_std", maps.std(axis=0))
    return from_pairs(pairs)


def sobel_magnitude(frame: np.ndarray) -> np.ndarray:
    """Unnormalized 3x3 Sobel gradient magnitude with replicate borders."""
    padded = np.pad(frame, 1, mode="edge")
    gx = np.zeros_like(frame)
    gy = np.zeros_like(frame)
    for dr in range(3):
        for dc in range(3):
            block = padded[dr : dr + frame.shape[0], dc : dc + frame.shape[1]]
            gx += SOBEL_X[dr, dc] * block
            gy += SOBEL_Y[dr, dc] * block
    return np.sqrt(gx**2 + gy**2)


def sobel_edge_features(inds: Inds) -> FeatureVector:
    maps = channel_mean(inds.diffs)
    edges = [sobel_magnitude(maps[t]) for t in range(maps.shape[0])]
    rs = [pearson(edges[t], edges[t + 1]) for t in range(len(edges) - 1)]
    pairs = [(f"edge.adjacent.r{t}", rs[t]) for t in range(len(rs))]
    pairs += stat_pairs("edge.adjacent", rs)
    pairs += stat_pairs("edge.mean_magnitude", [float(e.mean()) for e in edges])
    return from_pairs(pairs)
