"""Simultaneous perturbation stochastic approximation."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .objective import BudgetExhausted, Objective
from .trace import OptimizerTrace

DEFAULT_ALPHA = 0.602
DEFAULT_GAMMA = 0.101
DEFAULT_C = 0.1


@dataclass(frozen=True)
class SpsaSchedule:
    """Gain sequences ``a_t = a / (t + 1 + A)**alpha`` and ``c_t = c / (t + 1)**gamma``."""

    a: float
    c: float = DEFAULT_C
    A: float = 0.0
    alpha: float = DEFAULT_ALPHA
    gamma: float = DEFAULT_GAMMA

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("a must be positive")
        if not self.c > 0:
            raise ValueError("c must be positive")
        if self.A < 0:
            raise ValueError("A must be non-negative")
        if self.alpha <= 0 or self.gamma < 0:
            raise ValueError("alpha must be positive and gamma non-negative")

    def a_t(self, t: int) -> float:
        return self.a / (t + 1 + self.A) ** self.alpha

    def c_t(self, t: int) -> float:
        return self.c / (t + 1) ** self.gamma


def rademacher(rng: np.random.Generator, dim: int) -> np.ndarray:
    return rng.choice(np.array([-1.0, 1.0]), size=dim)


def spsa_gradient(obj, theta: np.ndarray, c_t: float, delta: np.ndarray) -> np.ndarray:
    """Two-point estimate ``[L(theta + c_t delta) - L(theta - c_t delta)] / (2 c_t delta_j)``."""
    diff = obj(theta + c_t * delta) - obj(theta - c_t * delta)
    return diff / (2.0 * c_t * delta)


def calibrate_spsa(
    obj,
    theta0: np.ndarray,
    max_iter: int,
    rng_seed: int,
    target_step: float = 0.1,
    c: float = DEFAULT_C,
    alpha: float = DEFAULT_ALPHA,
    gamma: float = DEFAULT_GAMMA,
    samples: int = 5,
) -> SpsaSchedule:
    """Pick ``a`` so the first update moves each component by about ``target_step``.

    Uses ``2 * samples`` objective evaluations; ``A`` is set to ``0.1 * max_iter``.
    """
    rng = np.random.default_rng(rng_seed)
    theta0 = np.asarray(theta0, dtype=float)
    mags = []
    for _ in range(samples):
        delta = rademacher(rng, theta0.size)
        mags.append(abs(obj(theta0 + c * delta) - obj(theta0 - c * delta)) / (2 * c))
    mean = float(np.mean(mags))
    A = 0.1 * max_iter
    a = target_step * (1 + A) ** alpha / mean if mean > 0 else target_step
    return SpsaSchedule(a=a, c=c, A=A, alpha=alpha, gamma=gamma)


def spsa_minimize(
    obj: Objective,
    theta0,
    schedule: SpsaSchedule,
    max_iter: int,
    rng_seed: int,
    track_every: int = 1,
) -> OptimizerTrace:
    """Run ``max_iter`` SPSA updates; no gradient-based stopping rule.

    Each update spends exactly two evaluations. With ``track_every = k > 0``
    the loss at the current point is also evaluated (and recorded) at the
    start and after every ``k``-th update and the last one; ``best_theta`` is
    the best tracked point. With ``track_every = 0`` nothing is recorded and
    ``best_theta`` is the final iterate.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    theta = np.array(theta0, dtype=float)
    if theta.shape != (obj.dimension,):
        raise ValueError("theta0 does not match the objective dimension")
    rng = np.random.default_rng(rng_seed)
    trace = OptimizerTrace("spsa")
    start = time.monotonic()

    def track(iteration: int) -> None:
        trace.record(iteration, obj(theta), theta, obj.total_evals, time.monotonic() - start)

    trace.status = "max_iter"
    try:
        if track_every:
            track(0)
        for t in range(max_iter):
            delta = rademacher(rng, theta.size)
            theta = theta - schedule.a_t(t) * spsa_gradient(obj, theta, schedule.c_t(t), delta)
            if track_every and ((t + 1) % track_every == 0 or t == max_iter - 1):
                track(t + 1)
    except BudgetExhausted as exc:
        trace.message = str(exc)
    if not track_every:
        trace.best_theta = theta.copy()
    return trace
