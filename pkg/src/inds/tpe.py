"""Tree-structured Parzen estimator over a small box search space.

After a block of random startup trials, the history is split at the 0.25
objective quantile into good and bad sets; each dimension gets Gaussian
Parzen densities l (good) and g (bad) with Scott-style bandwidths, 24
candidates are drawn from l, and the candidate maximizing l/g is proposed.
Log-scaled dimensions are modeled in log space. Deterministic per seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

N_STARTUP = 10
GAMMA = 0.25
N_CANDIDATES = 24


@dataclass(frozen=True)
class Dimension:
    name: str
    kind: str  # uniform | loguniform | int
    lo: float
    hi: float

    def __post_init__(self):
        if self.kind not in ("uniform", "loguniform", "int"):
            raise ValueError(f"unknown dimension kind {self.kind!r}")
        if not self.lo < self.hi:
            raise ValueError(f"{self.name}: lo must be < hi")
        if self.kind == "loguniform" and self.lo <= 0:
            raise ValueError(f"{self.name}: log dimensions need lo > 0")

    def transform(self, v: float) -> float:
        return math.log(v) if self.kind == "loguniform" else float(v)

    def untransform(self, t: float) -> float:
        v = math.exp(t) if self.kind == "loguniform" else t
        v = min(max(v, self.lo), self.hi)
        return float(round(v)) if self.kind == "int" else float(v)

    def bounds_t(self) -> tuple[float, float]:
        if self.kind == "loguniform":
            return math.log(self.lo), math.log(self.hi)
        return self.lo, self.hi

    def sample_random(self, rng: np.random.Generator) -> float:
        lo_t, hi_t = self.bounds_t()
        return self.untransform(rng.uniform(lo_t, hi_t))


@dataclass
class TrialResult:
    params: dict[str, float]
    objective: float
    threshold: float | None = None
    metrics: dict[str, float] = field(default_factory=dict)
    note: str | None = None
    index: int = -1

    def as_dict(self) -> dict:
        return {
            "index": self.index,
            "params": self.params,
            "objective": self.objective,
            "threshold": self.threshold,
            "metrics": self.metrics,
            "note": self.note,
        }


@dataclass(frozen=True)
class TrialOutcome:
    """What eval_fn may return besides a bare float."""

    objective: float
    threshold: float | None = None
    metrics: dict[str, float] = field(default_factory=dict)


def _bandwidth(values: np.ndarray, span: float) -> float:
    # Scott-style rate with a count-annealed floor: a tight cluster of few
    # observations must still propose in a neighborhood wide enough to move
    floor = span / min(100.0, max(float(len(values)), 2.0))
    if len(values) < 2:
        return max(span / 4.0, floor)
    return max(1.06 * float(values.std()) * len(values) ** -0.2, floor)


def _mixture(values: np.ndarray, lo_t: float, hi_t: float) -> tuple[np.ndarray, np.ndarray]:
    """Observation kernels plus one span-wide prior kernel at mid-range,
    which keeps proposals from collapsing onto a single repeated point."""
    span = hi_t - lo_t
    bw = _bandwidth(values, span)
    centers = np.append(values, 0.5 * (lo_t + hi_t))
    bws = np.append(np.full(len(values), bw), span)
    return centers, bws


def _log_mix(x: np.ndarray, centers: np.ndarray, bws: np.ndarray) -> np.ndarray:
    z = (x[:, None] - centers[None, :]) / bws[None, :]
    log_terms = -0.5 * z**2 - np.log(bws[None, :] * math.sqrt(2 * math.pi))
    peak = log_terms.max(axis=1, keepdims=True)
    return (peak[:, 0] + np.log(np.exp(log_terms - peak).sum(axis=1))) - math.log(len(centers))


def _propose(dim: Dimension, good: np.ndarray, bad: np.ndarray, rng: np.random.Generator) -> float:
    lo_t, hi_t = dim.bounds_t()
    l_centers, l_bws = _mixture(good, lo_t, hi_t)
    comp = rng.integers(0, len(l_centers), size=N_CANDIDATES)
    cands = np.clip(
        l_centers[comp] + l_bws[comp] * rng.standard_normal(N_CANDIDATES), lo_t, hi_t
    )
    score = _log_mix(cands, l_centers, l_bws)
    if len(bad):
        g_centers, g_bws = _mixture(bad, lo_t, hi_t)
        score = score - _log_mix(cands, g_centers, g_bws)
    return dim.untransform(float(cands[int(np.argmax(score))]))


def tpe_optimize(
    space: list[Dimension],
    n_trials: int,
    eval_fn: Callable[[dict[str, float]], float | TrialOutcome],
    seed: int = 0,
    n_startup: int = N_STARTUP,
) -> tuple[TrialResult, list[TrialResult]]:
    """Run the optimization loop; returns (best trial, full trial log)."""
    if n_trials < 1:
        raise ValueError("need at least one trial")
    if not space:
        raise ValueError("empty search space")
    rng = np.random.default_rng(seed)
    history: list[TrialResult] = []
    for t in range(n_trials):
        if t < n_startup or len(history) < 2:
            params = {d.name: d.sample_random(rng) for d in space}
        else:
            objs = np.array([h.objective for h in history])
            order = np.argsort(-objs, kind="stable")
            n_good = max(1, math.ceil(GAMMA * len(history)))
            good_idx = set(order[:n_good].tolist())
            params = {}
            for d in space:
                vals_t = np.array([d.transform(h.params[d.name]) for h in history])
                good = vals_t[[i in good_idx for i in range(len(history))]]
                bad = vals_t[[i not in good_idx for i in range(len(history))]]
                params[d.name] = _propose(d, good, bad, rng)
        try:
            outcome = eval_fn(params)
        except Exception as exc:  # noqa: BLE001 - trial isolation by contract
            trial = TrialResult(params=params, objective=0.0, note=f"eval failed: {exc}", index=t)
        else:
            if isinstance(outcome, TrialOutcome):
                trial = TrialResult(
                    params=params,
                    objective=float(outcome.objective),
                    threshold=outcome.threshold,
                    metrics=dict(outcome.metrics),
                    index=t,
                )
            else:
                trial = TrialResult(params=params, objective=float(outcome), index=t)
        history.append(trial)
    best = max(history, key=lambda h: h.objective)
    return best, history


def default_search_space() -> list[Dimension]:
    """The classifier search box used by the training pipeline."""
    return [
        Dimension("learning_rate", "loguniform", 0.01, 0.3),
        Dimension("num_trees", "int", 50, 400),
        Dimension("max_leaves", "int", 7, 63),
        Dimension("min_samples_leaf", "int", 5, 50),
        Dimension("feature_fraction", "uniform", 0.5, 1.0),
        Dimension("bagging_fraction", "uniform", 0.5, 1.0),
        Dimension("l2_reg", "loguniform", 1e-3, 10.0),
    ]
