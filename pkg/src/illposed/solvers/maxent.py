"""Maximum-entropy regularization by projected gradient."""

from __future__ import annotations

import numpy as np

from ..core import DimensionError, DomainError, as_vector
from .base import History, SolveReport, StopRule, prepare

FLOOR = 1e-10


def entropy_term(x: np.ndarray, omega: np.ndarray) -> float:
    return float(np.sum(x * np.log(omega * x)))


def maxent(A, y, lam: float, omega=None, stop: StopRule | None = None, x0=None,
           grad_tol: float = 1e-10) -> SolveReport:
    """Minimize ``||A x - y||^2 + lam^2 sum_i x_i log(omega_i x_i)`` over ``x >= 1e-10``.

    Barzilai-Borwein trial steps with Armijo backtracking against the current
    objective, so the history never increases. Stops when the projected
    gradient norm falls below ``grad_tol`` times its initial value.
    """
    stop = stop or StopRule(max_iters=2000, rel_tol=1e-14)
    op, y = prepare(A, y)
    n = op.shape[1]
    omega = np.ones(n) if omega is None else as_vector(omega, "omega")
    if omega.size != n:
        raise DimensionError("omega must have one weight per unknown")
    if np.any(omega <= 0):
        raise DomainError("omega entries must be positive")
    if lam < 0:
        raise DomainError("lambda must be non-negative")
    lam2 = lam**2

    def f(x):
        r = op.matvec(x) - y
        return float(r @ r) + lam2 * entropy_term(x, omega), r

    def grad(x, r):
        return 2.0 * op.rmatvec(r) + lam2 * (np.log(omega * x) + 1.0)

    def proj(x):
        return np.maximum(x, FLOOR)

    if x0 is None:
        x = proj(op.rmatvec(y))
    else:
        x = proj(np.asarray(x0, dtype=float))
    fx, r = f(x)
    g = grad(x, r)
    pg0 = np.linalg.norm(proj(x - g) - x)
    hist = History(stop)
    step = 1.0 / max(np.linalg.norm(g), 1e-300)
    backtracks = 0
    for _ in range(stop.max_iters):
        t = step
        while True:
            x_new = proj(x - t * g)
            f_new, r_new = f(x_new)
            d = x_new - x
            if f_new <= fx + 1e-4 * float(g @ d) or t < 1e-300:
                break
            t *= 0.5
            backtracks += 1
        g_new = grad(x_new, r_new)
        s, dg = x_new - x, g_new - g
        sy = float(s @ dg)
        step = float(s @ s) / sy if sy > 0 else 1.0 / max(np.linalg.norm(g_new), 1e-300)
        x, fx, g = x_new, f_new, g_new
        if hist.record(fx, float(np.linalg.norm(r_new)), x):
            break
        if np.linalg.norm(proj(x - g) - x) <= grad_tol * max(pg0, 1e-300):
            return hist.finish(x, "converged", backtracks=backtracks)
    return hist.finish(x, backtracks=backtracks)
