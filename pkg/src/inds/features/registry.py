"""Named feature vectors and imputation of invalid entries."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class FeatureVector:
    """Ordered (name, value) pairs; names are unique and module-prefixed."""

    names: list[str] = field(default_factory=list)
    values: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if len(self.names) != self.values.size:
            raise ValueError(f"{len(self.names)} names vs {self.values.size} values")
        if len(set(self.names)) != len(self.names):
            dupes = sorted({n for n in self.names if self.names.count(n) > 1})
            raise ValueError(f"duplicate feature names: {dupes[:5]}")

    def __len__(self):
        return self.values.size

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.names, self.values.tolist()))


def from_pairs(pairs: list[tuple[str, float]]) -> FeatureVector:
    names = [n for n, _ in pairs]
    return FeatureVector(names, np.array([v for _, v in pairs], dtype=np.float64))


def concat(parts: list[FeatureVector]) -> FeatureVector:
    names: list[str] = []
    for p in parts:
        names.extend(p.names)
    values = np.concatenate([p.values for p in parts]) if parts else np.zeros(0)
    return FeatureVector(names, values)


def impute_invalid(v: FeatureVector, policy: str = "median") -> FeatureVector:
    """Replace non-finite entries: `median` of the finite ones (0 if none
    are finite), or plain `zero`."""
    if policy not in ("median", "zero"):
        raise ValueError(f"unknown imputation policy {policy!r}")
    vals = v.values.copy()
    bad = ~np.isfinite(vals)
    if bad.any():
        if policy == "median":
            finite = vals[~bad]
            fill = float(np.median(finite)) if finite.size else 0.0
        else:
            fill = 0.0
        vals[bad] = fill
    return FeatureVector(list(v.names), vals)
