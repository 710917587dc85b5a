from __future__ import annotations

from typing import Callable, Sequence

import numpy as np


class BudgetExhausted(RuntimeError):
    """Raised by :class:`Objective` once its evaluation budget is spent."""


class Objective:
    """Counted wrapper around a scalar loss ``L(theta)``.

    Every call increments :attr:`evals`. ``gradient`` is optional and its
    calls are tallied separately in :attr:`grad_evals`; ``grad_cost`` says
    how many loss evaluations one gradient is worth (``2 * dimension`` for
    parameter shift), which :attr:`total_evals` uses for budget accounting.
    With ``max_evals`` set, a call that would push :attr:`total_evals` past
    it raises :class:`BudgetExhausted` instead of evaluating.
    """

    def __init__(
        self,
        fn: Callable[[np.ndarray], float],
        dimension: int,
        gradient: Callable[[np.ndarray], np.ndarray] | None = None,
        grad_cost: int = 0,
        max_evals: int | None = None,
    ):
        self._fn = fn
        self._grad = gradient
        self.dimension = int(dimension)
        self.grad_cost = int(grad_cost)
        self.max_evals = max_evals
        self.evals = 0
        self.grad_evals = 0

    @property
    def total_evals(self) -> int:
        return self.evals + self.grad_cost * self.grad_evals

    @property
    def has_gradient(self) -> bool:
        return self._grad is not None

    def _check(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.dimension,):
            raise ValueError(f"expected a vector of length {self.dimension}, got shape {theta.shape}")
        return theta

    def _spend(self, cost: int) -> None:
        if self.max_evals is not None and self.total_evals + cost > self.max_evals:
            raise BudgetExhausted(f"evaluation budget of {self.max_evals} exhausted")

    def __call__(self, theta) -> float:
        self._spend(1)
        self.evals += 1
        return float(self._fn(self._check(theta)))

    def gradient(self, theta) -> np.ndarray:
        if self._grad is None:
            raise ValueError("objective has no gradient")
        self._spend(self.grad_cost)
        self.grad_evals += 1
        return np.asarray(self._grad(self._check(theta)), dtype=float)


def finite_difference_gradient(obj: Callable[[np.ndarray], float], theta: Sequence[float], step: float = 1e-5) -> np.ndarray:
    """Central differences, two evaluations per component."""
    if step <= 0:
        raise ValueError("step must be positive")
    theta = np.asarray(theta, dtype=float)
    grad = np.empty_like(theta)
    for j in range(theta.size):
        plus = theta.copy()
        plus[j] += step
        minus = theta.copy()
        minus[j] -= step
        grad[j] = (obj(plus) - obj(minus)) / (2 * step)
    return grad
