"""Bagged decision-tree ensemble for mean-decrease-in-impurity importances.

Binary Gini trees with per-node feature subsampling (sqrt of the feature
count per split) over bootstrap samples. Importances accumulate the
node-probability-weighted impurity decrease and are normalized to sum 1.
"""

from __future__ import annotations

import warnings

import numpy as np


def _gini(pos, total):
    if total == 0:
        return 0.0
    p = pos / total
    return 2.0 * p * (1.0 - p)


def _best_split(x, y, order):
    """Scan every boundary between distinct sorted values; returns
    (gain_fraction, threshold) with the gain expressed per node sample."""
    xs = x[order]
    ys = y[order]
    n = len(ys)
    pos_total = ys.sum()
    parent = _gini(pos_total, n)
    if parent == 0.0:
        return 0.0, None
    pos_left = np.cumsum(ys)[:-1]
    n_left = np.arange(1, n)
    n_right = n - n_left
    pos_right = pos_total - pos_left
    p_l = pos_left / n_left
    p_r = pos_right / n_right
    child = (n_left * 2 * p_l * (1 - p_l) + n_right * 2 * p_r * (1 - p_r)) / n
    gains = parent - child
    valid = xs[1:] != xs[:-1]
    if not valid.any():
        return 0.0, None
    gains = np.where(valid, gains, -np.inf)
    k = int(np.argmax(gains))
    thr = 0.5 * (xs[k] + xs[k + 1])
    return float(gains[k]), float(thr)


def _grow(x_all, y, idx, depth, max_depth, rng, importances, n_total, feat_per_split):
    n = len(idx)
    pos = y[idx].sum()
    if depth >= max_depth or n < 2 or pos == 0 or pos == n:
        return
    feats = rng.choice(x_all.shape[1], size=feat_per_split, replace=False)
    best = (0.0, None, None)
    for f in feats:
        col = x_all[idx, f]
        order = np.argsort(col, kind="stable")
        gain, thr = _best_split(col, y[idx], order)
        if thr is not None and gain > best[0]:
            best = (gain, int(f), thr)
    gain, f, thr = best
    if f is None or gain <= 0:
        return
    importances[f] += (n / n_total) * gain
    mask = x_all[idx, f] <= thr
    _grow(x_all, y, idx[mask], depth + 1, max_depth, rng, importances, n_total, feat_per_split)
    _grow(x_all, y, idx[~mask], depth + 1, max_depth, rng, importances, n_total, feat_per_split)


def forest_importance(
    x: np.ndarray,
    y: np.ndarray,
    n_trees: int = 200,
    seed: int = 0,
    max_depth: int = 8,
) -> np.ndarray:
    """Gini importances, normalized to sum 1; all zero for pure labels."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    n, n_feat = x.shape
    if n < 10:
        raise ValueError("need at least 10 samples")
    if set(np.unique(y)) - {0, 1}:
        raise ValueError("labels must be binary 0/1")
    if len(np.unique(y)) < 2:
        warnings.warn("single-class labels: importances are all zero")
        return np.zeros(n_feat)
    rng = np.random.default_rng(seed)
    feat_per_split = max(1, int(np.sqrt(n_feat)))
    importances = np.zeros(n_feat)
    for _ in range(n_trees):
        boot = rng.integers(0, n, size=n)
        _grow(x, y, boot, 0, max_depth, rng, importances, n, feat_per_split)
    total = importances.sum()
    return importances / total if total > 0 else importances
