"""Bidirectional explicit linear multistep stepping over a noise predictor.

One linear relation ties three consecutive states and the predictor output
at the middle state:

    x_{i-1} = (h_i^2 / h_{i+1}^2) (a_{i-1} / a_{i+1}) x_{i+1}
            + ((h_{i+1}^2 - h_i^2) / h_{i+1}^2) (a_{i-1} / a_i) x_i
            - (h_i (h_i + h_{i+1}) / h_{i+1}) a_{i-1} eps(x_i, i)

with a = alpha. Solving the same relation for x_{i+1} gives the inversion
step, so a full up-then-down traversal closes exactly up to float rounding.
The first move from the data side has no two-state history; it uses the
single-step update x' = (a'/a) x + a' h eps(x, i), whose algebraic inverse
is used symmetrically, keeping the round trip exact for any step count.
"""

from __future__ import annotations

import numpy as np

from .predictors import NoisePredictor, PredictorError
from .schedule import DegenerateScheduleError, NoiseSchedule
from .sequence import NoiseSequence, ShapeError


class InversionError(RuntimeError):
    pass


def _coeffs(sched: NoiseSchedule, i: int):
    a_lo, a_mid, a_hi = sched.alpha(i - 1), sched.alpha(i), sched.alpha(i + 1)
    h_mid, h_hi = sched.h(i), sched.h(i + 1)
    return a_lo, a_mid, a_hi, h_mid, h_hi


def belm_sample_step(x_hi: np.ndarray, x_mid: np.ndarray, i: int,
                     sched: NoiseSchedule, pred: NoisePredictor) -> np.ndarray:
    """Data-direction step: (x_{i+1}, x_i) -> x_{i-1}, anchor at index i."""
    if not 1 <= i <= sched.num_steps - 1:
        raise ValueError(f"anchor index {i} outside [1, {sched.num_steps - 1}]")
    if x_hi.shape != x_mid.shape:
        raise ShapeError(f"state shapes differ: {x_hi.shape} vs {x_mid.shape}")
    a_lo, a_mid, a_hi, h_mid, h_hi = _coeffs(sched, i)
    if h_hi == 0:
        raise DegenerateScheduleError("h_{i+1} is zero")
    eps = pred.predict(x_mid, i)
    c_hi = (h_mid**2 / h_hi**2) * (a_lo / a_hi)
    c_mid = ((h_hi**2 - h_mid**2) / h_hi**2) * (a_lo / a_mid)
    c_eps = (h_mid * (h_mid + h_hi) / h_hi) * a_lo
    return c_hi * x_hi + c_mid * x_mid - c_eps * eps


def belm_invert_step(x_lo: np.ndarray, x_mid: np.ndarray, i: int,
                     sched: NoiseSchedule, pred: NoisePredictor) -> np.ndarray:
    """Noise-direction step: (x_{i-1}, x_i) -> x_{i+1}; exact inverse of
    belm_sample_step for the same anchor x_i."""
    if not 1 <= i <= sched.num_steps - 1:
        raise ValueError(f"anchor index {i} outside [1, {sched.num_steps - 1}]")
    if x_lo.shape != x_mid.shape:
        raise ShapeError(f"state shapes differ: {x_lo.shape} vs {x_mid.shape}")
    a_lo, a_mid, a_hi, h_mid, h_hi = _coeffs(sched, i)
    if h_mid == 0:
        raise DegenerateScheduleError("h_i is zero")
    eps = pred.predict(x_mid, i)
    c_mid = ((h_hi**2 - h_mid**2) / h_hi**2) * (a_lo / a_mid)
    c_eps = (h_mid * (h_mid + h_hi) / h_hi) * a_lo
    inv = (h_hi**2 / h_mid**2) * (a_hi / a_lo)
    return inv * (x_lo - c_mid * x_mid + c_eps * eps)


def bootstrap_up(x0: np.ndarray, sched: NoiseSchedule, pred: NoisePredictor) -> np.ndarray:
    """Single-step move x_0 -> x_1, anchored at x_0."""
    a0, a1, h1 = sched.alpha(0), sched.alpha(1), sched.h(1)
    return (a1 / a0) * x0 + a1 * h1 * pred.predict(x0, 0)


def bootstrap_down(x1: np.ndarray, anchor_x0: np.ndarray,
                   sched: NoiseSchedule, pred: NoisePredictor) -> np.ndarray:
    """Algebraic inverse of bootstrap_up given the anchor state."""
    a0, a1, h1 = sched.alpha(0), sched.alpha(1), sched.h(1)
    return (a0 / a1) * x1 - a0 * h1 * pred.predict(anchor_x0, 0)


def invert_frame(latent: np.ndarray, sched: NoiseSchedule, pred: NoisePredictor) -> list[np.ndarray]:
    """Full inversion trajectory x_0 .. x_N; the last state is the recovered
    initial noise."""
    latent = np.asarray(latent, dtype=np.float64)
    traj = [latent]
    try:
        traj.append(bootstrap_up(latent, sched, pred))
        for i in range(1, sched.num_steps):
            traj.append(belm_invert_step(traj[i - 1], traj[i], i, sched, pred))
    except PredictorError as exc:
        raise InversionError(f"predictor failed at step {len(traj) - 1}: {exc}") from exc
    return traj


def reconstruct(x_noisiest: np.ndarray, x_second: np.ndarray,
                sched: NoiseSchedule, pred: NoisePredictor) -> np.ndarray:
    """Propagate the two noisiest states (x_N, x_{N-1}) back to x_0."""
    n = sched.num_steps
    if n == 1:
        # trajectory is (x_0, x_1); the second state is x_0 itself
        return bootstrap_down(x_noisiest, x_second, sched, pred)
    states = {n: np.asarray(x_noisiest, dtype=np.float64),
              n - 1: np.asarray(x_second, dtype=np.float64)}
    try:
        for i in range(n - 1, 0, -1):
            states[i - 1] = belm_sample_step(states[i + 1], states[i], i, sched, pred)
    except PredictorError as exc:
        raise InversionError(f"predictor failed at step {i}: {exc}") from exc
    return states[0]


def invert_video(latents: np.ndarray, sched: NoiseSchedule, pred: NoisePredictor) -> NoiseSequence:
    """Invert 8 standardized latents independently, keeping each final state."""
    latents = np.asarray(latents, dtype=np.float64)
    if latents.ndim != 4 or latents.shape[0] != 8:
        raise ShapeError(f"expected (8, C, H, W) latents, got {latents.shape}")
    noises = []
    for t in range(latents.shape[0]):
        try:
            noises.append(invert_frame(latents[t], sched, pred)[-1])
        except InversionError as exc:
            raise InversionError(f"frame {t}: {exc}") from exc
    return NoiseSequence(np.stack(noises))


def roundtrip_error(latent: np.ndarray, sched: NoiseSchedule, pred: NoisePredictor) -> float:
    """Relative L2 error of reconstruct(invert(x)) against x."""
    latent = np.asarray(latent, dtype=np.float64)
    traj = invert_frame(latent, sched, pred)
    back = reconstruct(traj[-1], traj[-2], sched, pred)
    denom = float(np.linalg.norm(latent))
    err = float(np.linalg.norm(back - latent))
    return err if denom == 0 else err / denom
