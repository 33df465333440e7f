"""Cost weighting, ROC traversal, threshold pick, and the gated objective.

The trial objective is J = 0.7 * Acc + 0.3 * GDR, forced to 0 whenever the
generated-class recall falls below the target. GDR is recall on the
generated (positive) class; the real rate is recall on the real class.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ACC_WEIGHT = 0.7
GDR_WEIGHT = 0.3


@dataclass(frozen=True)
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray


@dataclass
class EvalReport:
    accuracy: float
    gdr: float
    real_rate: float
    per_source: dict[str, float] = field(default_factory=dict)
    counts: dict[str, int] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "gdr": self.gdr,
            "real_rate": self.real_rate,
            "per_source": self.per_source,
            "counts": self.counts,
        }


def class_weights(y: np.ndarray, m: float = 1.008) -> np.ndarray:
    """Balanced weights N/(2 n_c) with the generated class scaled by m."""
    y = np.asarray(y, dtype=np.int64)
    n = len(y)
    n1 = int(y.sum())
    n0 = n - n1
    if n0 == 0 or n1 == 0:
        raise ValueError("both classes must be present")
    w = np.where(y == 1, n / (2.0 * n1) * m, n / (2.0 * n0))
    return w


def roc_curve(scores: np.ndarray, y: np.ndarray) -> RocCurve:
    """ROC at the >=-threshold rule over descending unique scores, with a
    leading +inf threshold so the curve starts at (0, 0)."""
    scores = np.asarray(scores, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    n1 = int(y.sum())
    n0 = len(y) - n1
    if n0 == 0 or n1 == 0:
        raise ValueError("both classes must be present")
    order = np.argsort(-scores, kind="stable")
    ys = y[order]
    ss = scores[order]
    tp = np.cumsum(ys)
    fp = np.cumsum(1 - ys)
    last = np.r_[ss[1:] != ss[:-1], True]  # last index of each distinct score
    thresholds = np.r_[np.inf, ss[last]]
    tpr = np.r_[0.0, tp[last] / n1]
    fpr = np.r_[0.0, fp[last] / n0]
    return RocCurve(fpr=fpr, tpr=tpr, thresholds=thresholds)


def auc(roc: RocCurve) -> float:
    return float(np.trapezoid(roc.tpr, roc.fpr))


def select_threshold(roc: RocCurve, tau: float) -> float:
    """First threshold along the descending-score traversal whose recall
    reaches tau; otherwise the recall-maximizing threshold."""
    hits = np.flatnonzero(roc.tpr >= tau)
    if len(hits):
        return float(roc.thresholds[hits[0]])
    return float(roc.thresholds[int(np.argmax(roc.tpr))])


def objective(accuracy: float, gdr: float, tau: float) -> float:
    if gdr < tau:
        return 0.0
    return ACC_WEIGHT * accuracy + GDR_WEIGHT * gdr


def evaluate(scores: np.ndarray, theta: float, y: np.ndarray,
             sources: list[str] | None = None) -> EvalReport:
    """Threshold scores at theta and report overall and per-source rates."""
    scores = np.asarray(scores, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    pred = (scores >= theta).astype(np.int64)
    correct = pred == y
    acc = float(correct.mean())
    pos = y == 1
    neg = ~pos
    gdr = float(correct[pos].mean()) if pos.any() else 0.0
    real_rate = float(correct[neg].mean()) if neg.any() else 0.0
    per_source: dict[str, float] = {}
    counts: dict[str, int] = {}
    if sources is not None:
        for src in sorted(set(sources)):
            mask = np.array([s == src for s in sources])
            per_source[src] = float(correct[mask].mean())
            counts[src] = int(mask.sum())
    return EvalReport(accuracy=acc, gdr=gdr, real_rate=real_rate,
                      per_source=per_source, counts=counts)
