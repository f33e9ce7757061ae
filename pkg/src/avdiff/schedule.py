"""Closed-form diffusion mathematics.

Schedule construction, forward-process sampling, the tractable reverse
posterior, recovery of the clean image from predicted noise, and timestep
respacing for faster sampling.

Conventions: steps are 1-based, t in {1..T}, with the cumulative
signal-retention product at step 0 defined as 1.  All schedule constants are
float64 regardless of model precision; the first posterior variance underflows
otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import torch

from .errors import ValidationError

SCHEDULE_KINDS = ("linear", "cosine")

LINEAR_BETA_START = 1e-4
LINEAR_BETA_END = 0.02

_COSINE_OFFSET = 0.008
_COSINE_BETA_CAP = 0.999


@dataclass(frozen=True)
class NoiseSchedule:
    """Per-step diffusion constants, immutable after construction.

    All vectors have length T and are indexed by step-1: ``betas[t-1]`` is the
    noise variance added at step t.
    """

    kind: str
    betas: np.ndarray
    alphas: np.ndarray
    alpha_bars: np.ndarray
    posterior_variances: np.ndarray

    @property
    def T(self) -> int:
        return len(self.betas)

    @property
    def alpha_bars_prev(self) -> np.ndarray:
        """Cumulative products shifted by one step, with step 0 defined as 1."""
        return np.concatenate(([1.0], self.alpha_bars[:-1]))

    @property
    def posterior_log_variances_clipped(self) -> np.ndarray:
        """Log posterior variances with the zero first entry floored.

        The first entry is replaced by the second (or by beta_1 when T == 1)
        so that log-space variance interpolation stays finite at t = 1.
        """
        floored = self.posterior_variances.copy()
        floored[0] = self.posterior_variances[1] if self.T > 1 else self.betas[0]
        return np.log(floored)


def _validate_betas(betas: np.ndarray) -> None:
    if betas.ndim != 1 or len(betas) < 1:
        raise ValidationError("betas must be a nonempty 1-D vector")
    if not np.all((betas > 0.0) & (betas < 1.0)):
        raise ValidationError("every beta must lie strictly inside (0, 1)")


def _build(kind: str, betas: np.ndarray, alpha_bars: np.ndarray | None = None) -> NoiseSchedule:
    _validate_betas(betas)
    alphas = 1.0 - betas
    if alpha_bars is None:
        alpha_bars = np.cumprod(alphas)
    if np.any(np.diff(alpha_bars) >= 0.0):
        raise ValidationError("cumulative alpha products must be strictly decreasing")
    alpha_bars_prev = np.concatenate(([1.0], alpha_bars[:-1]))
    posterior_variances = (1.0 - alpha_bars_prev) / (1.0 - alpha_bars) * betas
    schedule = NoiseSchedule(
        kind=kind,
        betas=betas,
        alphas=alphas,
        alpha_bars=alpha_bars,
        posterior_variances=posterior_variances,
    )
    for arr in (schedule.betas, schedule.alphas, schedule.alpha_bars, schedule.posterior_variances):
        arr.setflags(write=False)
    return schedule


def schedule_from_betas(betas, kind: str = "linear") -> NoiseSchedule:
    """Build a schedule from an explicit beta vector (fixtures, custom ramps)."""
    if kind not in SCHEDULE_KINDS:
        raise ValidationError(f"unknown schedule kind {kind!r}; expected one of {SCHEDULE_KINDS}")
    return _build(kind, np.asarray(betas, dtype=np.float64))


def make_schedule(kind: str, T: int) -> NoiseSchedule:
    """Construct the standard noise schedule of the given kind and length."""
    if T < 1:
        raise ValidationError(f"step count must be >= 1, got {T}")
    if kind == "linear":
        betas = np.linspace(LINEAR_BETA_START, LINEAR_BETA_END, T, dtype=np.float64)
    elif kind == "cosine":
        betas = _cosine_betas(T)
    else:
        raise ValidationError(f"unknown schedule kind {kind!r}; expected one of {SCHEDULE_KINDS}")
    return _build(kind, betas)


def _cosine_betas(T: int) -> np.ndarray:
    def f(u: float) -> float:
        return math.cos((u + _COSINE_OFFSET) / (1.0 + _COSINE_OFFSET) * math.pi / 2.0) ** 2

    betas = np.empty(T, dtype=np.float64)
    for t in range(T):
        betas[t] = min(1.0 - f((t + 1) / T) / f(t / T), _COSINE_BETA_CAP)
    return betas


def _check_t(schedule: NoiseSchedule, t) -> None:
    T = schedule.T
    if isinstance(t, (int, np.integer)):
        if not 1 <= t <= T:
            raise ValidationError(f"step index {t} outside [1, {T}]")
        return
    t_arr = t.detach().cpu().numpy() if torch.is_tensor(t) else np.asarray(t)
    if t_arr.size and (t_arr.min() < 1 or t_arr.max() > T):
        raise ValidationError(f"step indices outside [1, {T}]")


def _gather(vec: np.ndarray, t, like):
    """Look up per-step constants for 1-based t; scalar for int t, broadcastable otherwise."""
    if isinstance(t, (int, np.integer)):
        return float(vec[t - 1])
    trailing = (1,) * (like.ndim - 1)
    if torch.is_tensor(t):
        out = torch.as_tensor(vec, dtype=like.dtype, device=like.device)[t - 1]
        return out.reshape(-1, *trailing)
    return vec[np.asarray(t) - 1].reshape(-1, *trailing)


def _check_same_shape(a, b, what: str) -> None:
    if tuple(a.shape) != tuple(b.shape):
        raise ValidationError(f"{what}: shape mismatch {tuple(a.shape)} vs {tuple(b.shape)}")


def q_sample(schedule: NoiseSchedule, x0, t, eps):
    """Jump the forward process directly to step t given the clean image and noise."""
    _check_t(schedule, t)
    _check_same_shape(x0, eps, "q_sample")
    a = _gather(np.sqrt(schedule.alpha_bars), t, x0)
    s = _gather(np.sqrt(1.0 - schedule.alpha_bars), t, x0)
    return a * x0 + s * eps


def posterior_mean_variance(schedule: NoiseSchedule, x0, x_t, t):
    """Mean and variance of the tractable reverse posterior at step t.

    Returns a (mean, variance) pair; variance is a scalar for integer t and a
    broadcastable per-item array for batched t.
    """
    _check_t(schedule, t)
    _check_same_shape(x0, x_t, "posterior_mean_variance")
    coef_x0 = np.sqrt(schedule.alpha_bars_prev) * schedule.betas / (1.0 - schedule.alpha_bars)
    coef_xt = np.sqrt(schedule.alphas) * (1.0 - schedule.alpha_bars_prev) / (1.0 - schedule.alpha_bars)
    mean = _gather(coef_x0, t, x0) * x0 + _gather(coef_xt, t, x_t) * x_t
    variance = _gather(schedule.posterior_variances, t, x_t)
    return mean, variance


def predict_x0_from_eps(schedule: NoiseSchedule, x_t, t, eps):
    """Invert the one-step forward marginal: recover the clean image from noise."""
    _check_t(schedule, t)
    _check_same_shape(x_t, eps, "predict_x0_from_eps")
    s = _gather(np.sqrt(1.0 - schedule.alpha_bars), t, x_t)
    a = _gather(np.sqrt(schedule.alpha_bars), t, x_t)
    return (x_t - s * eps) / a


@dataclass(frozen=True)
class RespacedSchedule:
    """An evenly spaced subsequence of a base schedule with recomputed betas.

    ``used_steps`` are 1-based indices into the base schedule, ending at T.
    ``schedule`` is the effective schedule over the subsequence; its cumulative
    products equal the base schedule's at the retained steps exactly.
    """

    base: NoiseSchedule
    used_steps: tuple[int, ...]
    effective_betas: np.ndarray
    schedule: NoiseSchedule


def respace(schedule: NoiseSchedule, num_steps: int) -> RespacedSchedule:
    """Select an evenly spaced subsequence of steps ending at T."""
    T = schedule.T
    if not 1 <= num_steps <= T:
        raise ValidationError(f"num_steps {num_steps} outside [1, {T}]")
    used = [round(i * T / num_steps) for i in range(1, num_steps + 1)]
    effective = np.empty(num_steps, dtype=np.float64)
    prev = 0
    for i, s in enumerate(used):
        if s == prev + 1:
            # Consecutive steps keep the base beta bitwise.
            effective[i] = schedule.betas[s - 1]
        else:
            prev_bar = 1.0 if prev == 0 else schedule.alpha_bars[prev - 1]
            effective[i] = 1.0 - schedule.alpha_bars[s - 1] / prev_bar
        prev = s
    alpha_bars = schedule.alpha_bars[np.asarray(used) - 1].copy()
    eff_schedule = _build(schedule.kind, effective, alpha_bars=alpha_bars)
    return RespacedSchedule(
        base=schedule,
        used_steps=tuple(used),
        effective_betas=eff_schedule.betas,
        schedule=eff_schedule,
    )
