"""Discrete wavelet transforms over small signals and maps.

Analysis-only filter banks for haar, db4, and bior2.2. Two boundary modes:
`symmetric` (half-sample extension, output length floor((n + L - 1) / 2))
for short temporal trajectories, and `periodization` (circular, length n/2,
orthogonal for the orthonormal bases at any even length) for 2-D maps.
"""

from __future__ import annotations

import numpy as np

_SQRT2 = np.sqrt(2.0)

_DB4_LO = np.array(
    [
        0.23037781330885523,
        0.71484657055254150,
        0.63088076792959040,
        -0.02798376941698385,
        -0.18703481171888114,
        0.03084138183598697,
        0.03288301166698295,
        -0.01059740178499728,
    ]
)

FILTERS: dict[str, tuple[np.ndarray, np.ndarray]] = {
    "haar": (
        np.array([1.0, 1.0]) / _SQRT2,
        np.array([1.0, -1.0]) / _SQRT2,
    ),
    "db4": (
        _DB4_LO,
        # quadrature mirror: hi[k] = (-1)^k lo[L-1-k]
        np.array([(-1.0) ** k * _DB4_LO[len(_DB4_LO) - 1 - k] for k in range(len(_DB4_LO))]),
    ),
    "bior2.2": (
        _SQRT2 * np.array([-0.125, 0.25, 0.75, 0.25, -0.125]),
        _SQRT2 * np.array([-0.25, 0.5, -0.25]),
    ),
}

ORTHONORMAL = ("haar", "db4")


def filter_length(basis: str) -> int:
    lo, hi = FILTERS[basis]
    return max(len(lo), len(hi))


def _analyze_symmetric(x: np.ndarray, f: np.ndarray) -> np.ndarray:
    pad = len(f) - 1
    xp = np.pad(x, (pad, pad), mode="symmetric") if pad else x
    full = np.convolve(xp, f[::-1], mode="valid")
    return full[1::2]


def _analyze_periodic(x: np.ndarray, f: np.ndarray) -> np.ndarray:
    n = len(x)
    if n % 2:
        x = np.append(x, x[-1])
        n += 1
    idx = (2 * np.arange(n // 2)[:, None] + np.arange(len(f))[None, :]) % n
    return (x[idx] * f).sum(axis=1)


def dwt1d(x, basis: str, mode: str = "symmetric") -> tuple[np.ndarray, np.ndarray]:
    """One analysis level: (approximation, detail) coefficients."""
    x = np.asarray(x, dtype=np.float64)
    lo, hi = FILTERS[basis]
    if mode == "symmetric":
        return _analyze_symmetric(x, lo), _analyze_symmetric(x, hi)
    if mode == "periodization":
        return _analyze_periodic(x, lo), _analyze_periodic(x, hi)
    raise ValueError(f"unknown mode {mode!r}")


def dwt2d(img, basis: str, mode: str = "periodization"):
    """One separable 2-D level: (LL, LH, HL, HH)."""
    img = np.asarray(img, dtype=np.float64)
    lo_rows = np.stack([dwt1d(row, basis, mode)[0] for row in img])
    hi_rows = np.stack([dwt1d(row, basis, mode)[1] for row in img])

    def cols(block, which):
        return np.stack([dwt1d(col, basis, mode)[which] for col in block.T], axis=1)

    ll = cols(lo_rows, 0)
    lh = cols(lo_rows, 1)
    hl = cols(hi_rows, 0)
    hh = cols(hi_rows, 1)
    return ll, lh, hl, hh


def wavedec1d(x, basis: str, levels: int, mode: str = "symmetric"):
    """Multilevel 1-D analysis with a shortness guard.

    Level 1 always runs (boundary extension supplies enough samples); a
    deeper level is skipped, along with everything below it, once the
    running approximation is shorter than the filter. Returns
    (details_per_level, final_approx, levels_done); skipped levels simply
    do not appear.
    """
    x = np.asarray(x, dtype=np.float64)
    details = []
    approx = x
    done = 0
    for lvl in range(levels):
        if lvl > 0 and len(approx) < filter_length(basis):
            break
        approx, detail = dwt1d(approx, basis, mode)
        details.append(detail)
        done += 1
    return details, approx, done


def wavedec2d(img, basis: str, levels: int, mode: str = "periodization"):
    """Multilevel 2-D analysis: ([(LH, HL, HH) per level], final LL, levels_done)."""
    img = np.asarray(img, dtype=np.float64)
    bands = []
    ll = img
    done = 0
    for lvl in range(levels):
        if min(ll.shape) < 2:
            break
        ll, lh, hl, hh = dwt2d(ll, basis, mode)
        bands.append((lh, hl, hh))
        done += 1
    return bands, ll, done
