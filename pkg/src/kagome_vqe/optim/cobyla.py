"""Derivative-free trust-region minimization on linear simplex models.

This is the unconstrained branch of Powell's COBYLA: the loss is modelled by
the linear interpolant on ``n + 1`` simplex vertices, the model is minimized
inside a ball of radius ``rho``, and ``rho`` only ever shrinks.
"""

from __future__ import annotations

import time
from typing import Callable

import numpy as np

from .objective import BudgetExhausted, Objective
from .trace import OptimizerTrace

# Powell's simplex acceptability and step constants
ALPHA = 0.25  # minimum vertex-to-face distance, in units of rho
DELTA = 1.1  # maximum vertex distance from the base point, in units of rho
GAMMA = 0.5  # geometry step length, in units of rho
POOR_RATIO = 0.1
MIN_VOLUME_RATIO = 1e-3


def cobyla_minimize(
    obj: Objective,
    theta0,
    rho_beg: float = 0.5,
    rho_end: float = 1e-6,
    max_iter: int = 1000,
    callback: Callable[[int, np.ndarray, np.ndarray], None] | None = None,
) -> OptimizerTrace:
    """Minimize ``obj`` from ``theta0``.

    One iteration is one new loss evaluation after the ``n + 1`` needed to
    set up the initial simplex. ``callback`` receives
    ``(iteration, base_point, edge_matrix)`` where the rows of
    ``edge_matrix`` are the vertices relative to the base point.
    """
    if not rho_beg > rho_end > 0:
        raise ValueError("need rho_beg > rho_end > 0")
    x0 = np.array(theta0, dtype=float)
    n = x0.size
    trace = OptimizerTrace("cobyla")
    start = time.monotonic()
    rho = float(rho_beg)

    f0 = obj(x0)
    sim = np.eye(n) * rho
    fvals = np.array([obj(x0 + sim[j]) for j in range(n)])

    def rebase(j: int) -> None:
        nonlocal x0, f0
        shift = sim[j].copy()
        x0 = x0 + shift
        sim[:] -= shift
        sim[j] = -shift
        f0, fvals[j] = fvals[j], f0

    def best_to_base() -> None:
        j = int(np.argmin(fvals))
        if fvals[j] < f0:
            rebase(j)

    best_to_base()
    trace.record(0, f0, x0, obj.total_evals, time.monotonic() - start)
    it = 0
    poor = False
    try:
        while True:
            inv = np.linalg.inv(sim)
            # d_i . inv[:, j] = delta_ij: column j is normal to the face opposite vertex j
            vsig = 1.0 / np.linalg.norm(inv, axis=0)
            veta = np.linalg.norm(sim, axis=1)
            grad = inv @ (fvals - f0)
            acceptable = bool(np.all(veta <= DELTA * rho) and np.all(vsig >= ALPHA * rho))

            if acceptable and (poor or not np.any(grad)):
                poor = False
                if rho <= rho_end:
                    trace.status = "converged"
                    break
                rho *= 0.5
                if rho <= 1.5 * rho_end:
                    rho = rho_end
                continue
            if it >= max_iter:
                trace.status = "max_iter"
                break
            it += 1

            if not acceptable:
                j = int(np.argmax(veta)) if np.any(veta > DELTA * rho) else int(np.argmin(vsig))
                step = inv[:, j] * (GAMMA * rho * vsig[j])
                if grad @ step > 0:
                    step = -step
                f_new = obj(x0 + step)
                sim[j] = step
                fvals[j] = f_new
                poor = False
            else:
                gnorm = float(np.linalg.norm(grad))
                step = -rho * grad / gnorm
                f_new = obj(x0 + step)
                improved = f_new < f0
                poor = (f0 - f_new) < POOR_RATIO * rho * gnorm
                sigma = np.abs(step @ inv)
                if improved:
                    dist = np.linalg.norm(sim - step, axis=1)
                else:
                    dist = veta
                score = sigma * np.maximum(1.0, dist / (DELTA * rho)) ** 2
                score[sigma < MIN_VOLUME_RATIO] = 0.0
                j = int(np.argmax(score)) if score.max() > 0 else int(np.argmax(sigma))
                if improved or score[j] > 1.0:
                    sim[j] = step
                    fvals[j] = f_new
            best_to_base()
            trace.record(it, f0, x0, obj.total_evals, time.monotonic() - start)
            if callback is not None:
                callback(it, x0, sim)
    except BudgetExhausted as exc:
        trace.status = "max_iter"
        trace.message = str(exc)
    trace.best_theta = x0.copy()
    trace.best_energy = float(f0)
    return trace
