"""Shared numeric helpers for the feature extractors.

Conventions used everywhere: population (divide-by-n) moments, Pearson
correlations imputed to 0 when either operand has zero variance, and
histogram entropies in bits.
"""

from __future__ import annotations

import numpy as np

STAT_NAMES = ("mean", "std", "variance", "max", "min", "median", "skewness", "kurtosis")


def summary_stats(series) -> dict[str, float]:
    """The eight summary statistics of a scalar series.

    Skewness m3/sigma^3 and excess kurtosis m4/sigma^4 - 3, both imputed to
    0 for constant input.
    """
    x = np.asarray(series, dtype=np.float64).ravel()
    if x.size == 0:
        raise ValueError("empty series")
    mean = float(x.mean())
    centered = x - mean
    var = float(np.mean(centered**2))
    std = float(np.sqrt(var))
    if std > 0:
        z = centered / std  # standardize before powering to avoid overflow
        skew = float(np.mean(z**3))
        kurt = float(np.mean(z**4) - 3.0)
    else:
        skew = 0.0
        kurt = 0.0
    return {
        "mean": mean,
        "std": std,
        "variance": var,
        "max": float(x.max()),
        "min": float(x.min()),
        "median": float(np.median(x)),
        "skewness": skew,
        "kurtosis": kurt,
    }


def stat_pairs(prefix: str, series) -> list[tuple[str, float]]:
    stats = summary_stats(series)
    return [(f"{prefix}.{k}", stats[k]) for k in STAT_NAMES]


def pearson(a, b) -> float:
    """Pearson r; 0 when either operand is constant."""
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    ac = a - a.mean()
    bc = b - b.mean()
    denom = np.sqrt((ac**2).sum() * (bc**2).sum())
    if denom == 0:
        return 0.0
    return float(np.clip((ac * bc).sum() / denom, -1.0, 1.0))


def histogram_entropy(x, bins: int) -> float:
    """Entropy in bits of an equal-width histogram over the array's own
    range; 0 for zero-range input."""
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.size == 0 or x.max() == x.min():
        return 0.0
    counts, _ = np.histogram(x, bins=bins)
    p = counts[counts > 0] / x.size
    return float(-(p * np.log2(p)).sum())


def mutual_information(a, b, bins: int = 32) -> float:
    """Histogram mutual information in bits, each marginal binned over its
    own range; 0 when either input has zero range."""
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.max() == a.min() or b.max() == b.min():
        return 0.0
    joint, _, _ = np.histogram2d(a, b, bins=bins)
    joint = joint / joint.sum()
    pa = joint.sum(axis=1)
    pb = joint.sum(axis=0)
    mask = joint > 0
    outer = np.outer(pa, pb)
    return float((joint[mask] * np.log2(joint[mask] / outer[mask])).sum())


def channel_mean(inds_diffs: np.ndarray) -> np.ndarray:
    """(7, C, H, W) -> (7, H, W) channel-averaged maps."""
    return inds_diffs.mean(axis=1)


def tile_views(frame: np.ndarray, size: int = 8):
    """Non-overlapping size x size tiles of a 2-D map; a frame smaller than
    one tile is yielded whole. Ragged remainders are dropped."""
    h, w = frame.shape
    if h < size or w < size:
        yield frame
        return
    for r in range(0, h - size + 1, size):
        for c in range(0, w - size + 1, size):
            yield frame[r : r + size, c : c + size]
