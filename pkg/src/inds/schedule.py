"""Diffusion discretization: (alpha, sigma) states and derived step sizes.

States run from the data side (index 0, alpha near 1) to the noise side
(index N). Step sizes use the noise-to-signal increment
h_i = sigma_i/alpha_i - sigma_{i-1}/alpha_{i-1}, which is the coordinate in
which the two-point multistep relation is exact on linear trajectories.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DegenerateScheduleError(ValueError):
    pass


@dataclass(frozen=True)
class ScheduleStep:
    index: int
    alpha: float
    sigma: float
    h: float  # step size into this state; 0.0 for index 0


@dataclass(frozen=True)
class NoiseSchedule:
    steps: tuple[ScheduleStep, ...]
    kind: str = "custom"

    def __post_init__(self):
        if len(self.steps) < 2:
            raise DegenerateScheduleError("schedule needs at least 2 states")
        alphas = [s.alpha for s in self.steps]
        sigmas = [s.sigma for s in self.steps]
        if any(a2 >= a1 for a1, a2 in zip(alphas, alphas[1:])):
            raise DegenerateScheduleError("alpha must strictly decrease")
        if any(s2 <= s1 for s1, s2 in zip(sigmas, sigmas[1:])):
            raise DegenerateScheduleError("sigma must strictly increase")
        if any(s.h <= 0 for s in self.steps[1:]):
            raise DegenerateScheduleError("interior step sizes must be positive")

    @property
    def num_steps(self) -> int:
        return len(self.steps) - 1

    def alpha(self, i: int) -> float:
        return self.steps[i].alpha

    def sigma(self, i: int) -> float:
        return self.steps[i].sigma

    def h(self, i: int) -> float:
        return self.steps[i].h


def step_size(alpha_prev, sigma_prev, alpha_cur, sigma_cur) -> float:
    return sigma_cur / alpha_cur - sigma_prev / alpha_prev


def schedule_from_alpha_sigma(alphas, sigmas, kind="custom") -> NoiseSchedule:
    steps = []
    for i, (a, s) in enumerate(zip(alphas, sigmas)):
        h = 0.0 if i == 0 else step_size(alphas[i - 1], sigmas[i - 1], a, s)
        steps.append(ScheduleStep(index=i, alpha=float(a), sigma=float(s), h=float(h)))
    return NoiseSchedule(steps=tuple(steps), kind=kind)


def make_schedule(num_steps: int, kind: str = "linear_beta", params: dict | None = None) -> NoiseSchedule:
    """Build an (N+1)-state schedule from the data side to the noise side.

    linear_beta: beta linearly spaced over [1e-4, 0.02] across 1000 virtual
    steps; alpha_i is the square root of the (1-beta) cumulative product at
    num_steps+1 evenly spaced virtual indices, sigma_i = sqrt(1 - alpha_i^2).
    """
    if num_steps < 1:
        raise DegenerateScheduleError("num_steps must be >= 1")
    params = params or {}
    if kind == "linear_beta":
        virtual = int(params.get("virtual_steps", 1000))
        beta_lo = float(params.get("beta_start", 1e-4))
        beta_hi = float(params.get("beta_end", 0.02))
        betas = np.linspace(beta_lo, beta_hi, virtual)
        alpha_bar = np.cumprod(1.0 - betas)
        picks = np.round(np.linspace(0, virtual - 1, num_steps + 1)).astype(int)
        alphas = np.sqrt(alpha_bar[picks])
        sigmas = np.sqrt(1.0 - alphas**2)
        return schedule_from_alpha_sigma(alphas, sigmas, kind="linear_beta")
    if kind == "custom":
        return schedule_from_alpha_sigma(params["alphas"], params["sigmas"])
    raise ValueError(f"unknown schedule kind {kind!r}")
