"""Histogram gradient-boosted trees for weighted binary logistic loss.

Features are bucketed into at most 64 quantile bins; trees grow leaf-wise
(best gain first) up to a leaf budget, with leaf values taking the
L2-regularized Newton step -G/(H + l2). Sample weights are normalized to
mean 1 on entry, so uniformly rescaling them cannot change the model.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

N_BINS = 64


@dataclass(frozen=True)
class GbdtParams:
    learning_rate: float = 0.1
    num_trees: int = 100
    max_leaves: int = 31
    min_samples_leaf: int = 5
    feature_fraction: float = 1.0
    bagging_fraction: float = 1.0
    l2_reg: float = 1.0

    def __post_init__(self):
        if not 0 < self.learning_rate <= 1:
            raise ValueError("learning_rate in (0, 1]")
        if self.num_trees < 0 or self.max_leaves < 2 or self.min_samples_leaf < 1:
            raise ValueError("bad tree budget")
        if not 0 < self.feature_fraction <= 1 or not 0 < self.bagging_fraction <= 1:
            raise ValueError("fractions in (0, 1]")
        if self.l2_reg < 0:
            raise ValueError("l2_reg must be >= 0")


@dataclass
class _Node:
    feature: int = -1
    threshold: float = 0.0
    left: int = -1
    right: int = -1
    value: float = 0.0
    is_leaf: bool = True


@dataclass
class GbdtModel:
    params: GbdtParams
    base_margin: float
    trees: list[list[_Node]] = field(default_factory=list)
    n_features: int = 0
    feature_names: list[str] | None = None

    def margins(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape[1] != self.n_features:
            raise ValueError(f"model expects {self.n_features} features, got {x.shape[1]}")
        out = np.full(len(x), self.base_margin)
        for tree in self.trees:
            idx = np.zeros(len(x), dtype=np.int64)
            active = np.arange(len(x))
            while len(active):
                nodes = idx[active]
                leaf_mask = np.array([tree[k].is_leaf for k in nodes])
                done = active[leaf_mask]
                out[done] += self.params.learning_rate * np.array(
                    [tree[k].value for k in idx[done]]
                )
                active = active[~leaf_mask]
                if not len(active):
                    break
                nodes = idx[active]
                feats = np.array([tree[k].feature for k in nodes])
                thrs = np.array([tree[k].threshold for k in nodes])
                # bin code <= b corresponds to raw value strictly below thr[b]
                go_left = x[active, feats] < thrs
                idx[active] = np.array(
                    [tree[k].left if gl else tree[k].right for k, gl in zip(nodes, go_left)]
                )
        return out


def predict_proba(model: GbdtModel, x: np.ndarray) -> np.ndarray:
    """Sigmoid of the ensemble margin."""
    m = np.clip(model.margins(x), -500, 500)
    return 1.0 / (1.0 + np.exp(-m))


def _bin_features(x: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
    """Quantile-bucket every column; returns codes and per-column split values."""
    n, f = x.shape
    codes = np.zeros((n, f), dtype=np.int64)
    thresholds = []
    qs = np.linspace(0, 1, N_BINS + 1)[1:-1]
    for k in range(f):
        thr = np.unique(np.quantile(x[:, k], qs))
        codes[:, k] = np.searchsorted(thr, x[:, k], side="right")
        thresholds.append(thr)
    return codes, thresholds


def _histograms(codes, rows, feats, g, h):
    """Per-feature (grad, hess, count) histograms over the given rows."""
    sub = codes[np.ix_(rows, feats)]
    offsets = np.arange(len(feats)) * N_BINS
    flat = (sub + offsets[None, :]).ravel()
    size = len(feats) * N_BINS
    gh = np.bincount(flat, weights=np.repeat(g[rows], len(feats)), minlength=size)
    hh = np.bincount(flat, weights=np.repeat(h[rows], len(feats)), minlength=size)
    ch = np.bincount(flat, minlength=size)
    return (
        gh.reshape(len(feats), N_BINS),
        hh.reshape(len(feats), N_BINS),
        ch.reshape(len(feats), N_BINS),
    )


def _best_splits(gh, hh, ch, l2, min_leaf):
    """Vectorized best (gain, bin) per feature from its histograms."""
    g_tot = gh.sum(axis=1, keepdims=True)
    h_tot = hh.sum(axis=1, keepdims=True)
    gl = np.cumsum(gh, axis=1)[:, :-1]
    hl = np.cumsum(hh, axis=1)[:, :-1]
    cl = np.cumsum(ch, axis=1)[:, :-1]
    gr = g_tot - gl
    hr = h_tot - hl
    cr = ch.sum(axis=1, keepdims=True) - cl
    with np.errstate(divide="ignore", invalid="ignore"):
        parent = (g_tot**2) / (h_tot + l2)
        gain = 0.5 * (gl**2 / (hl + l2) + gr**2 / (hr + l2) - parent)
    gain[~np.isfinite(gain)] = -np.inf
    gain[(cl < min_leaf) | (cr < min_leaf)] = -np.inf
    best_bin = np.argmax(gain, axis=1)
    best_gain = gain[np.arange(len(gh)), best_bin]
    return best_gain, best_bin


def train_gbdt(
    x: np.ndarray,
    y: np.ndarray,
    weights: np.ndarray | None,
    params: GbdtParams,
    seed: int = 0,
    feature_names: list[str] | None = None,
) -> GbdtModel:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape[1] == 0:
        raise ValueError("empty feature set")
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite feature values")
    n, n_feat = x.shape
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=np.float64)
    w = w / w.mean()  # scale invariance of weighted loss minimizers
    rng = np.random.default_rng(seed)

    p0 = float((w * y).sum() / w.sum())
    p0 = min(max(p0, 1e-12), 1 - 1e-12)
    base = float(np.log(p0 / (1 - p0)))
    model = GbdtModel(params=params, base_margin=base, n_features=n_feat,
                      feature_names=list(feature_names) if feature_names else None)

    codes, col_thresholds = _bin_features(x)
    margins = np.full(n, base)
    n_bag = max(1, int(round(params.bagging_fraction * n)))
    n_feats_used = max(1, int(round(params.feature_fraction * n_feat)))

    for _ in range(params.num_trees):
        prob = 1.0 / (1.0 + np.exp(-np.clip(margins, -500, 500)))
        grad = w * (prob - y)
        hess = w * prob * (1 - prob)
        rows = (
            np.sort(rng.choice(n, size=n_bag, replace=False))
            if n_bag < n
            else np.arange(n)
        )
        feats = (
            np.sort(rng.choice(n_feat, size=n_feats_used, replace=False))
            if n_feats_used < n_feat
            else np.arange(n_feat)
        )
        tree = _grow_tree(codes, col_thresholds, rows, feats, grad, hess, params)
        model.trees.append(tree)
        # update margins with the unscaled leaf outputs of all rows
        margins += params.learning_rate * _tree_margins(tree, codes)
    return model


def _tree_margins(tree: list[_Node], codes: np.ndarray) -> np.ndarray:
    out = np.zeros(len(codes))
    idx = np.zeros(len(codes), dtype=np.int64)
    active = np.arange(len(codes))
    while len(active):
        leaf_mask = np.array([tree[k].is_leaf for k in idx[active]])
        done = active[leaf_mask]
        out[done] = np.array([tree[k].value for k in idx[done]])
        active = active[~leaf_mask]
        if not len(active):
            break
        nodes = idx[active]
        feats = np.array([tree[k].feature for k in nodes])
        bins = np.array([tree[k]._bin for k in nodes])
        go_left = codes[active, feats] <= bins
        idx[active] = np.array(
            [tree[k].left if gl else tree[k].right for k, gl in zip(nodes, go_left)]
        )
    return out


def _grow_tree(codes, col_thresholds, rows, feats, grad, hess, params: GbdtParams):
    l2 = params.l2_reg

    def leaf_value(r):
        return float(-grad[r].sum() / (hess[r].sum() + l2))

    tree: list[_Node] = [_Node(value=leaf_value(rows))]
    tree[0]._bin = -1  # type: ignore[attr-defined]
    leaf_rows = {0: rows}
    candidates = {}

    def evaluate(node_id):
        r = leaf_rows[node_id]
        if len(r) < 2 * params.min_samples_leaf:
            return
        gh, hh, ch = _histograms(codes, r, feats, grad, hess)
        gains, bins = _best_splits(gh, hh, ch, l2, params.min_samples_leaf)
        k = int(np.argmax(gains))
        if np.isfinite(gains[k]) and gains[k] > 0:
            candidates[node_id] = (float(gains[k]), int(feats[k]), int(bins[k]))

    evaluate(0)
    while len(leaf_rows) < params.max_leaves and candidates:
        node_id = max(candidates, key=lambda nid: (candidates[nid][0], -nid))
        gain, feat, bin_id = candidates.pop(node_id)
        r = leaf_rows.pop(node_id)
        go_left = codes[r, feat] <= bin_id
        left_rows, right_rows = r[go_left], r[~go_left]
        thr_list = col_thresholds[feat]
        threshold = float(thr_list[bin_id]) if bin_id < len(thr_list) else float("inf")
        node = tree[node_id]
        node.is_leaf = False
        node.feature = feat
        node.threshold = threshold
        node._bin = bin_id  # type: ignore[attr-defined]
        for child_rows in (left_rows, right_rows):
            child = _Node(value=leaf_value(child_rows))
            child._bin = -1  # type: ignore[attr-defined]
            tree.append(child)
            child_id = len(tree) - 1
            leaf_rows[child_id] = child_rows
            if node.left == -1:
                node.left = child_id
            else:
                node.right = child_id
        for child_id in (node.left, node.right):
            evaluate(child_id)
    return tree


def save_model(model: GbdtModel, path: str | Path) -> None:
    doc = {
        "format": "inds-gbdt",
        "version": 1,
        "params": asdict(model.params),
        "base_margin": model.base_margin,
        "n_features": model.n_features,
        "feature_names": model.feature_names,
        "trees": [
            [
                {
                    "feature": nd.feature,
                    "threshold": nd.threshold,
                    "left": nd.left,
                    "right": nd.right,
                    "value": nd.value,
                    "is_leaf": nd.is_leaf,
                }
                for nd in tree
            ]
            for tree in model.trees
        ],
    }
    Path(path).write_text(json.dumps(doc))


def load_model(path: str | Path) -> GbdtModel:
    doc = json.loads(Path(path).read_text())
    if doc.get("format") != "inds-gbdt" or doc.get("version") != 1:
        raise ValueError("not a recognized model document")
    model = GbdtModel(
        params=GbdtParams(**doc["params"]),
        base_margin=doc["base_margin"],
        n_features=doc["n_features"],
        feature_names=doc.get("feature_names"),
    )
    for tree_doc in doc["trees"]:
        model.trees.append([_Node(**nd) for nd in tree_doc])
    return model
