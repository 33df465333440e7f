"""Spatiotemporal features over the difference sequence.

Energy distributions

    E_global         = sum_{t,c,h,w} d_t^2(c,h,w)
    E_temporal(t)    = sum_{c,h,w}   d_t^2(c,h,w)
    E_spatial(h,w)   = sum_{t,c}     d_t^2(c,h,w)

a fused 3-D gradient magnitude sqrt(Gt^2 + Gh^2 + Gw^2), a correlation
suite (adjacent-frame Pearson, per-site trajectories, autocorrelations,
first/last-frame mutual information, frame-vs-patch energy coupling), and
pairwise channel-interaction correlations.
"""

from __future__ import annotations

import numpy as np

from ..sequence import Inds
from .common import (
    channel_mean,
    mutual_information,
    pearson,
    stat_pairs,
    tile_views,
)
from .registry import FeatureVector, from_pairs

# re-exported: summary_stats is defined alongside the shared helpers
from .common import summary_stats  # noqa: F401


def energy_profile(inds: Inds):
    d2 = inds.diffs**2
    e_temporal = d2.sum(axis=(1, 2, 3))
    e_spatial = d2.sum(axis=(0, 1))
    e_global = float(d2.sum())
    return e_global, e_temporal, e_spatial


def energy_features(inds: Inds) -> FeatureVector:
    e_global, e_temporal, e_spatial = energy_profile(inds)
    pairs = [("energy.global", e_global)]
    pairs += stat_pairs("energy.temporal", e_temporal)
    pairs += stat_pairs("energy.spatial", e_spatial)
    pairs += stat_pairs("energy.temporal_diff", np.diff(e_temporal))
    return from_pairs(pairs)


def gradient_field(inds: Inds):
    """Central differences along t, h, w per channel; forward/backward at
    the ends (numpy.gradient stencil)."""
    g_t, g_h, g_w = np.gradient(inds.diffs, axis=(0, 2, 3))
    mag = np.sqrt(g_t**2 + g_h**2 + g_w**2)
    return g_t, g_h, g_w, mag


def gradient_features(inds: Inds) -> FeatureVector:
    g_t, g_h, g_w, mag = gradient_field(inds)
    pairs = stat_pairs("gradient.magnitude", mag)
    pairs += [
        ("gradient.mean_abs_t", float(np.abs(g_t).mean())),
        ("gradient.mean_abs_h", float(np.abs(g_h).mean())),
        ("gradient.mean_abs_w", float(np.abs(g_w).mean())),
    ]
    return from_pairs(pairs)


def _mean_patch_energy(frame: np.ndarray) -> float:
    return float(np.mean([float((tile**2).sum()) for tile in tile_views(frame, 8)]))


def correlation_features(inds: Inds) -> FeatureVector:
    d = inds.diffs
    t_len = d.shape[0]
    pairs: list[tuple[str, float]] = []

    # adjacent-frame Pearson over flattened diffs
    adj = [pearson(d[t], d[t + 1]) for t in range(t_len - 1)]
    pairs += [(f"correlation.adjacent.r{t}", adj[t]) for t in range(t_len - 1)]
    pairs += stat_pairs("correlation.adjacent", adj)

    # per-site temporal trajectories against the global mean trajectory
    maps = channel_mean(d)  # (7, H, W)
    global_traj = d.mean(axis=(1, 2, 3))
    flat = maps.reshape(t_len, -1)
    gc = global_traj - global_traj.mean()
    fc = flat - flat.mean(axis=0)
    denom = np.sqrt((fc**2).sum(axis=0) * (gc**2).sum())
    num = fc.T @ gc
    site_r = np.where(denom > 0, num / np.where(denom > 0, denom, 1.0), 0.0)
    pairs += stat_pairs("correlation.site_traj", np.clip(site_r, -1, 1))

    # temporal autocorrelation of the frame-mean series, lags 1..3
    fm = d.mean(axis=(1, 2, 3))
    for lag in (1, 2, 3):
        pairs.append((f"correlation.temporal_autocorr.lag{lag}", pearson(fm[:-lag], fm[lag:])))

    # shift-by-one spatial autocorrelation along h and along w
    rh = [pearson(d[t, c, :-1, :], d[t, c, 1:, :]) for t in range(t_len) for c in range(d.shape[1])]
    rw = [pearson(d[t, c, :, :-1], d[t, c, :, 1:]) for t in range(t_len) for c in range(d.shape[1])]
    pairs.append(("correlation.spatial_autocorr.h", float(np.mean(rh))))
    pairs.append(("correlation.spatial_autocorr.w", float(np.mean(rw))))

    # nonlinear first/last dependence
    pairs.append(("correlation.mi_first_last", mutual_information(d[0], d[-1])))

    # frame-level energy against mean local 8x8 patch energy
    _, e_temporal, _ = energy_profile(inds)
    patch_series = [_mean_patch_energy(maps[t]) for t in range(t_len)]
    pairs.append(("correlation.cross_frame_patch", pearson(e_temporal, patch_series)))

    return from_pairs(pairs)


def channel_interaction_features(inds: Inds) -> FeatureVector:
    d = inds.diffs
    t_len, c_len = d.shape[:2]
    if c_len < 2:
        raise ValueError("channel interactions need at least 2 channels")
    pair_idx = [(a, b) for a in range(c_len) for b in range(a + 1, c_len)]
    per_pair = np.zeros((len(pair_idx), t_len))
    for t in range(t_len):
        flat = d[t].reshape(c_len, -1)
        for k, (a, b) in enumerate(pair_idx):
            per_pair[k, t] = pearson(flat[a], flat[b])
    pairs = stat_pairs("channel.pooled", per_pair.ravel())
    for k, (a, b) in enumerate(pair_idx):
        pairs.append((f"channel.stability.c{a}c{b}", float(per_pair[k].std())))
    return from_pairs(pairs)
