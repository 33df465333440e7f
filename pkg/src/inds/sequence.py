"""Frame sampling, spatial standardization, and difference-sequence construction.

Eight frames are sampled per video and their inverted initial noises are
differenced pairwise into a 7-element sequence; every downstream feature
extractor consumes that sequence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

NUM_FRAMES = 8
NUM_DIFFS = NUM_FRAMES - 1


class EmptyVideoError(ValueError):
    pass


class ShapeError(ValueError):
    pass


@dataclass(frozen=True)
class NoiseSequence:
    """Per-frame initial noises in temporal order, shape (8, C, H, W)."""

    frames: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.frames, dtype=np.float64)
        if f.ndim != 4 or f.shape[0] != NUM_FRAMES:
            raise ShapeError(f"expected ({NUM_FRAMES}, C, H, W), got {f.shape}")
        object.__setattr__(self, "frames", f)

    @property
    def frame_dims(self) -> tuple[int, int, int]:
        return self.frames.shape[1:]


@dataclass(frozen=True)
class Inds:
    """Initial-noise difference sequence d_t, shape (7, C, H, W)."""

    diffs: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.diffs, dtype=np.float64)
        if d.ndim != 4 or d.shape[0] != NUM_DIFFS:
            raise ShapeError(f"expected ({NUM_DIFFS}, C, H, W), got {d.shape}")
        object.__setattr__(self, "diffs", d)

    @property
    def frame_dims(self) -> tuple[int, int, int]:
        return self.diffs.shape[1:]


def sample_frame_indices(total_frames: int, count: int = 8, stride: int = 2) -> list[int]:
    """Uniformly spaced frame indices with graceful short-clip fallback.

    Tries the requested stride, falls back to stride 1, and for clips shorter
    than `count` repeats the last valid index to fill.
    """
    if total_frames == 0:
        raise EmptyVideoError("video has no frames")
    if total_frames < 0 or count < 1 or stride < 1:
        raise ValueError("total_frames, count and stride must be positive")
    if (count - 1) * stride < total_frames:
        return [i * stride for i in range(count)]
    if count <= total_frames:
        return list(range(count))
    idx = list(range(total_frames))
    idx.extend([total_frames - 1] * (count - total_frames))
    return idx


def standardize_frame(frame: np.ndarray, target: int = 512) -> np.ndarray:
    """Center-crop or zero-pad a H x W [x C] frame to target x target.

    Odd margins split floor on the top/left side, ceil on the bottom/right.
    """
    frame = np.asarray(frame, dtype=np.float64)
    if frame.ndim not in (2, 3):
        raise ShapeError(f"expected H x W or H x W x C, got shape {frame.shape}")
    squeeze = frame.ndim == 2
    if squeeze:
        frame = frame[:, :, None]
    h, w, c = frame.shape
    if h < 1 or w < 1:
        raise ShapeError("degenerate frame")

    def crop_or_pad(arr, size, axis):
        n = arr.shape[axis]
        if n > size:
            lo = (n - size) // 2
            sl = [slice(None)] * arr.ndim
            sl[axis] = slice(lo, lo + size)
            return arr[tuple(sl)]
        if n < size:
            lo = (size - n) // 2
            pad = [(0, 0)] * arr.ndim
            pad[axis] = (lo, size - n - lo)
            return np.pad(arr, pad)
        return arr

    out = crop_or_pad(crop_or_pad(frame, target, 0), target, 1)
    return out[:, :, 0] if squeeze else out


def build_inds(seq: NoiseSequence) -> Inds:
    """Difference sequence d_t = eps_{t+1} - eps_t for t = 1..7."""
    return Inds(np.diff(seq.frames, axis=0))
