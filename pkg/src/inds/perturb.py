"""Pixel-domain perturbations for the robustness protocol.

Everything here touches frames before encoding, never latents or features.
JPEG goes through an external transcoder hook; without one configured the
perturbation reports itself as skipped instead of failing the run.
"""

from __future__ import annotations

import math
import shlex
import subprocess
import tempfile
from pathlib import Path

import numpy as np


class PerturbationError(RuntimeError):
    pass


class TranscoderUnavailable(RuntimeError):
    """Raised when a JPEG perturbation is requested with no transcoder."""


def gaussian_kernel(sigma: float) -> np.ndarray:
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    radius = math.ceil(3 * sigma)
    xs = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-0.5 * (xs / sigma) ** 2)
    return k / k.sum()


def _convolve_axis(frame: np.ndarray, kernel: np.ndarray, axis: int) -> np.ndarray:
    radius = len(kernel) // 2
    pad = [(0, 0)] * frame.ndim
    pad[axis] = (radius, radius)
    padded = np.pad(frame, pad, mode="edge")
    out = np.zeros_like(frame)
    for k, w in enumerate(kernel):
        sl = [slice(None)] * frame.ndim
        sl[axis] = slice(k, k + frame.shape[axis])
        out += w * padded[tuple(sl)]
    return out


def perturb_blur(frame: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian with replicate borders; unit-mass kernel."""
    frame = np.asarray(frame, dtype=np.float64)
    kernel = gaussian_kernel(sigma)
    return _convolve_axis(_convolve_axis(frame, kernel, 0), kernel, 1)


def perturb_noise(frame: np.ndarray, sigma: float, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return np.asarray(frame, dtype=np.float64) + sigma * rng.standard_normal(frame.shape)


def _area_resample_axis(arr: np.ndarray, new_n: int, axis: int) -> np.ndarray:
    """Fractional box-mean resampling along one axis via cumulative sums."""
    n = arr.shape[axis]
    moved = np.moveaxis(arr, axis, 0)
    cs = np.concatenate([np.zeros((1, *moved.shape[1:])), np.cumsum(moved, axis=0)], axis=0)
    bounds = np.linspace(0.0, n, new_n + 1)
    grid = np.arange(n + 1, dtype=np.float64)
    flat = cs.reshape(n + 1, -1)
    interp = np.stack([np.interp(bounds, grid, flat[:, j]) for j in range(flat.shape[1])], axis=1)
    sums = interp[1:] - interp[:-1]
    widths = (bounds[1:] - bounds[:-1])[:, None]
    out = (sums / widths).reshape(new_n, *moved.shape[1:])
    return np.moveaxis(out, 0, axis)


def perturb_resize(frame: np.ndarray, factor: float) -> np.ndarray:
    """Area-averaged rescale of the two leading spatial axes."""
    if factor <= 0:
        raise ValueError("factor must be positive")
    frame = np.asarray(frame, dtype=np.float64)
    h = max(1, int(round(frame.shape[0] * factor)))
    w = max(1, int(round(frame.shape[1] * factor)))
    return _area_resample_axis(_area_resample_axis(frame, h, 0), w, 1)


def write_ppm(path: str | Path, frame: np.ndarray) -> None:
    """8-bit binary PPM; values clipped to 0..255."""
    frame = np.asarray(frame, dtype=np.float64)
    if frame.ndim == 2:
        frame = np.repeat(frame[:, :, None], 3, axis=2)
    if frame.shape[2] != 3:
        raise ValueError("PPM needs 3 channels")
    h, w, _ = frame.shape
    data = np.clip(np.rint(frame), 0, 255).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode())
        fh.write(data.tobytes())


def read_ppm(path: str | Path) -> np.ndarray:
    blob = Path(path).read_bytes()
    if not blob.startswith(b"P6"):
        raise PerturbationError(f"{path}: not a binary PPM")
    fields: list[bytes] = []
    pos = 2
    while len(fields) < 3:
        while pos < len(blob) and blob[pos : pos + 1].isspace():
            pos += 1
        if blob[pos : pos + 1] == b"#":
            while pos < len(blob) and blob[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(blob) and not blob[pos : pos + 1].isspace():
            pos += 1
        fields.append(blob[start:pos])
    w, h, maxval = (int(f) for f in fields)
    if maxval != 255:
        raise PerturbationError(f"{path}: unsupported maxval {maxval}")
    pos += 1
    data = np.frombuffer(blob, dtype=np.uint8, count=h * w * 3, offset=pos)
    return data.reshape(h, w, 3).astype(np.float64)


def perturb_jpeg(frame: np.ndarray, quality: int, transcoder_cmd: str | None) -> np.ndarray:
    """Round-trip a frame through the configured transcoder command.

    The command receives {input} (PPM), {output} (PPM), and {quality}
    placeholders and is expected to compress and decompress in between.
    """
    if not transcoder_cmd:
        raise TranscoderUnavailable("no JPEG transcoder configured")
    with tempfile.TemporaryDirectory(prefix="jpeghook") as tmp:
        src = Path(tmp) / "in.ppm"
        dst = Path(tmp) / "out.ppm"
        write_ppm(src, frame)
        cmd = [
            part.format(input=str(src), output=str(dst), quality=str(quality))
            for part in shlex.split(transcoder_cmd)
        ]
        proc = subprocess.run(cmd, capture_output=True, text=True)
        if proc.returncode != 0:
            raise PerturbationError(
                f"transcoder exited {proc.returncode}: {proc.stderr.strip()[:300]}"
            )
        if not dst.exists():
            raise PerturbationError("transcoder produced no output file")
        return read_ppm(dst)


def apply_perturbation(frame: np.ndarray, op: str, transcoder_cmd: str | None = None,
                       seed: int = 0) -> np.ndarray:
    """Dispatch an ``op`` spec string: none, blur:S, jpeg:Q, resize:F, noise:S."""
    if op == "none":
        return np.asarray(frame, dtype=np.float64)
    head, _, arg = op.partition(":")
    if head == "blur":
        return perturb_blur(frame, float(arg))
    if head == "jpeg":
        return perturb_jpeg(frame, int(arg), transcoder_cmd)
    if head == "resize":
        return perturb_resize(frame, float(arg))
    if head == "noise":
        return perturb_noise(frame, float(arg), seed=seed)
    raise PerturbationError(f"unknown perturbation {op!r}")
