"""Synthetic manifest generation for desk-scale pipeline runs.

Generated-like videos get frame-to-frame deltas confined to a low-rank
temporal subspace with momentum-correlated coefficients plus a small
isotropic residual; real-like videos get full-rank heavy-tailed deltas.
The same contrast is rendered either as latent noise sequences or as
pixel-domain frame stacks.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .tensors import VideoManifestEntry, write_manifest, write_tensor

NUM_FRAMES = 8
MOMENTUM = 0.8


@dataclass(frozen=True)
class SyntheticSpec:
    n_real: int
    n_generated: int
    rank_generated: int = 2
    noise_scale_real: float = 1.0
    noise_scale_generated: float = 0.05
    channels: int = 4
    size: int = 8
    domain: str = "noise"  # noise sequences or pixel frames
    pixel_size: int = 32
    pixel_channels: int = 3

    def __post_init__(self):
        if self.n_real < 1 or self.n_generated < 1 or self.rank_generated < 1:
            raise ValueError("counts and rank must be >= 1")
        if self.noise_scale_real < self.noise_scale_generated:
            raise ValueError("real noise scale must be >= generated noise scale")
        if self.domain not in ("noise", "frames"):
            raise ValueError(f"unknown domain {self.domain!r}")


def _generated_deltas(rng, shape, rank, residual_scale):
    basis = rng.standard_normal((rank, *shape))
    coefs = np.zeros((NUM_FRAMES - 1, rank))
    step = rng.standard_normal(rank)
    for t in range(NUM_FRAMES - 1):
        step = MOMENTUM * step + (1 - MOMENTUM) * rng.standard_normal(rank)
        coefs[t] = step
    deltas = np.tensordot(coefs, basis, axes=(1, 0))
    deltas += residual_scale * rng.standard_normal(deltas.shape)
    return deltas


def _real_deltas(rng, shape, scale):
    return scale * rng.standard_t(df=3, size=(NUM_FRAMES - 1, *shape))


def _frames_from_deltas(rng, shape, deltas):
    frames = np.zeros((NUM_FRAMES, *shape))
    frames[0] = rng.standard_normal(shape)
    for t in range(NUM_FRAMES - 1):
        frames[t + 1] = frames[t] + deltas[t]
    return frames


def _make_video(spec: SyntheticSpec, generated: bool, rng) -> np.ndarray:
    if spec.domain == "noise":
        shape = (spec.channels, spec.size, spec.size)
    else:
        shape = (spec.pixel_size, spec.pixel_size, spec.pixel_channels)
    if generated:
        deltas = _generated_deltas(rng, shape, spec.rank_generated, spec.noise_scale_generated)
    else:
        deltas = _real_deltas(rng, shape, spec.noise_scale_real)
    frames = _frames_from_deltas(rng, shape, deltas)
    if spec.domain == "frames":
        # keep pixel content inside a codec-friendly 0..255 band
        frames = np.clip(128.0 + 24.0 * frames, 0.0, 255.0)
    return frames


def synth_dataset(spec: SyntheticSpec, seed: int, out_dir: str | Path) -> Path:
    """Write tensors plus a manifest; returns the manifest path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    kind = "noise" if spec.domain == "noise" else "frames"
    entries = []
    jobs = [("generated", k) for k in range(spec.n_generated)]
    jobs += [("real", k) for k in range(spec.n_real)]
    for label, k in jobs:
        rng = np.random.default_rng([seed, 1 if label == "generated" else 0, k])
        video = _make_video(spec, label == "generated", rng)
        vid = f"{label[:4]}_{k:05d}"
        path = out / f"{vid}.ltns"
        write_tensor(path, video.astype(np.float32))
        entries.append(
            VideoManifestEntry(
                id=vid,
                tensor_path=str(path),
                label=label,
                source="synth-generator" if label == "generated" else "synth-real",
                kind=kind,
            )
        )
    manifest = out / "manifest.jsonl"
    write_manifest(manifest, entries)
    return manifest
