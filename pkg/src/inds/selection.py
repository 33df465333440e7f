"""Staged feature optimization.

Variance filtering keeps columns with Var(f) > sigma_min; forest
importances rank the survivors; cross-feature enhancement appends
Hadamard products f_i*f_j, guarded ratios f_i/(f_j + eps), and affine
blends alpha*f_i + beta*f_j over the top-ranked pairs; the combined score
is 0.4 * S_train + 0.6 * S_val with both sides min-max normalized across
features; combination strategies assemble the final name list.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .forest import forest_importance

TRAIN_WEIGHT = 0.4
VAL_WEIGHT = 0.6


class EmptySelectionError(ValueError):
    pass


@dataclass(frozen=True)
class SelectionConfig:
    sigma_min: float = 1e-10
    epsilon: float = 1e-8
    alpha: float = 0.5
    beta: float = 0.5
    cross_top_n: int = 20

    def __post_init__(self):
        # a negative sigma_min is a vacuous threshold and deliberately legal
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")


@dataclass(frozen=True)
class FeatureScore:
    s_train: np.ndarray
    s_val: np.ndarray

    @property
    def s_combined(self) -> np.ndarray:
        return TRAIN_WEIGHT * self.s_train + VAL_WEIGHT * self.s_val


def variance_filter(x: np.ndarray, cfg: SelectionConfig = SelectionConfig()) -> np.ndarray:
    """Indices of columns with population variance above the threshold."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] < 2:
        raise ValueError("need at least 2 samples")
    return np.flatnonzero(x.var(axis=0) > cfg.sigma_min)


def _ranked_order(importance: np.ndarray, names: list[str]) -> list[int]:
    # descending importance, lexicographic name as the deterministic tie-break
    return sorted(range(len(names)), key=lambda i: (-importance[i], names[i]))


def cross_enhance(
    x: np.ndarray,
    names: list[str],
    importance: np.ndarray,
    cfg: SelectionConfig = SelectionConfig(),
) -> tuple[np.ndarray, list[str]]:
    """Append the three pairwise crosses for the top-ranked features."""
    if cfg.cross_top_n > len(names):
        raise ValueError(f"cross_top_n {cfg.cross_top_n} exceeds feature count {len(names)}")
    top = _ranked_order(importance, names)[: cfg.cross_top_n]
    cols = [x]
    new_names = list(names)
    for a_pos in range(len(top)):
        for b_pos in range(a_pos + 1, len(top)):
            i, j = top[a_pos], top[b_pos]
            fi, fj = x[:, i], x[:, j]
            cols.append(np.column_stack([
                fi * fj,
                fi / (fj + cfg.epsilon),
                cfg.alpha * fi + cfg.beta * fj,
            ]))
            new_names += [
                f"cross.prod.{names[i]}__{names[j]}",
                f"cross.ratio.{names[i]}__{names[j]}",
                f"cross.affine.{names[i]}__{names[j]}",
            ]
    return np.hstack(cols), new_names


def anova_f(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """One-way ANOVA F statistic per column for binary labels."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    n = len(y)
    out = np.zeros(x.shape[1])
    g0, g1 = x[y == 0], x[y == 1]
    n0, n1 = len(g0), len(g1)
    if n0 == 0 or n1 == 0:
        raise ValueError("both classes required")
    mu = x.mean(axis=0)
    ssb = n0 * (g0.mean(axis=0) - mu) ** 2 + n1 * (g1.mean(axis=0) - mu) ** 2
    ssw = ((g0 - g0.mean(axis=0)) ** 2).sum(axis=0) + ((g1 - g1.mean(axis=0)) ** 2).sum(axis=0)
    msb = ssb / 1.0
    msw = ssw / (n - 2)
    np.divide(msb, msw, out=out, where=msw > 0)
    out[(msw <= 0) & (msb > 0)] = np.inf
    return out


def _univariate_logistic_coef(col: np.ndarray, y: np.ndarray, iters: int = 25) -> float:
    """|slope| of a 2-parameter logistic fit on the z-scored column."""
    sd = col.std()
    if sd == 0:
        return 0.0
    z = (col - col.mean()) / sd
    w = np.array([0.0, 0.0])  # intercept, slope
    design = np.column_stack([np.ones_like(z), z])
    for _ in range(iters):
        p = 1.0 / (1.0 + np.exp(-np.clip(design @ w, -500, 500)))
        grad = design.T @ (p - y)
        hess = design.T @ (design * (p * (1 - p))[:, None]) + 1e-9 * np.eye(2)
        step = np.linalg.solve(hess, grad)
        w -= step
        if np.abs(step).max() < 1e-10:
            break
    return float(abs(w[1]))


def _minmax(v: np.ndarray) -> np.ndarray:
    finite = np.isfinite(v)
    if not finite.any():
        return np.zeros_like(v)
    hi = v[finite].max()
    v = np.where(np.isfinite(v), v, hi)
    lo, hi = v.min(), v.max()
    if hi == lo:
        return np.zeros_like(v)
    return (v - lo) / (hi - lo)


def combined_score(
    x_train: np.ndarray,
    y_train: np.ndarray,
    x_val: np.ndarray,
    y_val: np.ndarray,
) -> FeatureScore:
    s_train = _minmax(anova_f(x_train, y_train))
    coefs = np.array([
        _univariate_logistic_coef(x_val[:, k], np.asarray(y_val, dtype=np.float64))
        for k in range(x_val.shape[1])
    ])
    s_val = _minmax(coefs)
    return FeatureScore(s_train=s_train, s_val=s_val)


def assemble_combination(
    strategy: str,
    names: list[str],
    scores: FeatureScore | None,
    importances: np.ndarray | None,
) -> list[str]:
    """Resolve a combination-strategy string to a feature-name list.

    Grammar: ``module:<prefix>``, ``modules:<p1,p2,...>``, ``topk:<K>``,
    ``all``, ``fuzzy[:<kw1,kw2,...>]`` (default keywords pca, energy,
    correlation; case-insensitive substring match).
    """
    if strategy == "all":
        if not names:
            raise EmptySelectionError("no features retained")
        return list(names)
    head, _, arg = strategy.partition(":")
    if head == "module":
        chosen = [n for n in names if n.startswith(arg)]
        if not chosen:
            raise EmptySelectionError(f"module prefix {arg!r} matches nothing")
        return chosen
    if head == "modules":
        prefixes = [p.strip() for p in arg.split(",") if p.strip()]
        chosen, seen = [], set()
        for p in prefixes:
            hits = [n for n in names if n.startswith(p)]
            if not hits:
                raise EmptySelectionError(f"module prefix {p!r} matches nothing")
            for n in hits:
                if n not in seen:
                    seen.add(n)
                    chosen.append(n)
        return chosen
    if head == "topk":
        k = int(arg)
        if k < 1 or importances is None:
            raise EmptySelectionError(f"topk needs K >= 1 and importances, got {arg!r}")
        if k > len(names):
            raise EmptySelectionError(f"topk {k} exceeds pool size {len(names)}")
        order = _ranked_order(importances, names)
        return [names[i] for i in order[:k]]
    if head == "fuzzy":
        keywords = [kw.strip().lower() for kw in arg.split(",") if kw.strip()] or [
            "pca",
            "energy",
            "correlation",
        ]
        chosen, seen = [], set()
        for kw in keywords:
            hits = [n for n in names if kw in n.lower()]
            if not hits:
                raise EmptySelectionError(f"fuzzy keyword {kw!r} matches nothing")
            for n in hits:
                if n not in seen:
                    seen.add(n)
                    chosen.append(n)
        return chosen
    raise EmptySelectionError(f"unknown strategy {strategy!r}")


__all__ = [
    "EmptySelectionError",
    "FeatureScore",
    "SelectionConfig",
    "anova_f",
    "assemble_combination",
    "combined_score",
    "cross_enhance",
    "forest_importance",
    "variance_filter",
]
