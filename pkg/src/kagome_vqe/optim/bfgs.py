"""Quasi-Newton minimization with the BFGS inverse-Hessian update."""

from __future__ import annotations

import time
from typing import Callable

import numpy as np

from .objective import BudgetExhausted, Objective
from .trace import OptimizerTrace

C1 = 1e-4
C2 = 0.9
MAX_TRIALS = 30
CURVATURE_EPS = 1e-10


class LineSearchError(RuntimeError):
    pass


def _interpolate(a_lo, a_hi, phi_lo, phi_hi, dphi_lo):
    """Minimizer of the quadratic through (a_lo, phi_lo, dphi_lo) and (a_hi, phi_hi), safeguarded."""
    span = a_hi - a_lo
    denom = 2.0 * (phi_hi - phi_lo - dphi_lo * span)
    if denom > 0:
        a = a_lo - dphi_lo * span * span / denom
        lo, hi = min(a_lo, a_hi), max(a_lo, a_hi)
        margin = 0.1 * (hi - lo)
        if lo + margin <= a <= hi - margin:
            return a
    return 0.5 * (a_lo + a_hi)


def wolfe_line_search(f, grad, x, fx, gx, p, c1=C1, c2=C2, max_trials=MAX_TRIALS):
    """Step length satisfying the strong Wolfe conditions.

    Returns ``(alpha, f_new, g_new)``. Raises :class:`LineSearchError` when
    ``p`` is not a descent direction or after ``max_trials`` trial points.
    """
    dphi0 = float(gx @ p)
    if dphi0 >= 0:
        raise LineSearchError("not a descent direction")
    trials = 0

    def probe(a):
        nonlocal trials
        trials += 1
        if trials > max_trials:
            raise LineSearchError(f"no acceptable step after {max_trials} trials")
        xa = x + a * p
        return f(xa), xa

    def zoom(a_lo, phi_lo, dphi_lo, a_hi, phi_hi):
        while True:
            a = _interpolate(a_lo, a_hi, phi_lo, phi_hi, dphi_lo)
            phi, xa = probe(a)
            if phi > fx + c1 * a * dphi0 or phi >= phi_lo:
                a_hi, phi_hi = a, phi
                continue
            g = grad(xa)
            dphi = float(g @ p)
            if abs(dphi) <= -c2 * dphi0:
                return a, phi, g
            if dphi * (a_hi - a_lo) >= 0:
                a_hi, phi_hi = a_lo, phi_lo
            a_lo, phi_lo, dphi_lo = a, phi, dphi

    a_prev, phi_prev, dphi_prev = 0.0, fx, dphi0
    a = 1.0
    first = True
    while True:
        phi, xa = probe(a)
        if phi > fx + c1 * a * dphi0 or (not first and phi >= phi_prev):
            return zoom(a_prev, phi_prev, dphi_prev, a, phi)
        g = grad(xa)
        dphi = float(g @ p)
        if abs(dphi) <= -c2 * dphi0:
            return a, phi, g
        if dphi >= 0:
            return zoom(a, phi, dphi, a_prev, phi_prev)
        a_prev, phi_prev, dphi_prev = a, phi, dphi
        a *= 2.0
        first = False


def bfgs_minimize(
    obj: Objective,
    theta0,
    grad_tol: float = 1e-6,
    max_iter: int = 200,
    callback: Callable[[int, np.ndarray, np.ndarray], None] | None = None,
) -> OptimizerTrace:
    """Minimize with BFGS until ``max|grad| < grad_tol`` or ``max_iter`` iterations.

    The first inverse-Hessian guess is rescaled by ``s.y / y.y`` after the
    first step; updates violating ``s.y > 1e-10`` are skipped. ``callback``
    sees ``(iteration, theta, inverse_hessian)`` after every iteration.
    """
    if not obj.has_gradient:
        raise ValueError("BFGS needs an objective with a gradient")
    x = np.array(theta0, dtype=float)
    n = x.size
    trace = OptimizerTrace("bfgs")
    start = time.monotonic()
    fx = obj(x)
    gx = obj.gradient(x)
    trace.record(0, fx, x, obj.total_evals, time.monotonic() - start, float(np.linalg.norm(gx)))
    H = np.eye(n)
    scaled = False
    for k in range(1, max_iter + 1):
        if np.max(np.abs(gx), initial=0.0) < grad_tol:
            trace.status = "converged"
            break
        p = -H @ gx
        if gx @ p >= 0:
            # lost positive definiteness numerically; restart from steepest descent
            H = np.eye(n)
            p = -gx
        try:
            alpha, f_new, g_new = wolfe_line_search(obj, obj.gradient, x, fx, gx, p)
        except LineSearchError as exc:
            trace.status = "stalled"
            trace.message = str(exc)
            break
        except BudgetExhausted as exc:
            trace.status = "max_iter"
            trace.message = str(exc)
            break
        s = alpha * p
        y = g_new - gx
        sy = float(s @ y)
        if sy > CURVATURE_EPS:
            if not scaled:
                H = np.eye(n) * (sy / float(y @ y))
                scaled = True
            rho = 1.0 / sy
            Hy = H @ y
            H = H + ((sy + y @ Hy) * rho * rho) * np.outer(s, s) - rho * (np.outer(Hy, s) + np.outer(s, Hy))
            H = 0.5 * (H + H.T)
        x = x + s
        fx, gx = f_new, g_new
        trace.record(k, fx, x, obj.total_evals, time.monotonic() - start, float(np.linalg.norm(gx)))
        if callback is not None:
            callback(k, x, H)
    else:
        trace.status = "converged" if np.max(np.abs(gx), initial=0.0) < grad_tol else "max_iter"
    return trace
