"""Least-squares iterations whose iteration count acts as the regularizer."""

from __future__ import annotations

import warnings
from typing import Callable

import numpy as np
import scipy.linalg as sla

from ..core import DomainError, as_matrix
from .base import FIXED_BUDGET, History, SolveReport, StopRule, prepare, spectral_norm

Callback = Callable[[int, np.ndarray], None]


def cgls(A, y, stop: StopRule = FIXED_BUDGET, x0=None, callback: Callback | None = None) -> SolveReport:
    """Conjugate gradients on the normal equations, without forming ``A^T A``.

    The objective recorded per iteration is ``||A x_k - y||^2``.
    ``callback(k, x_k)`` is invoked after every iteration.
    """
    op, y = prepare(A, y)
    n = op.shape[1]
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    r = y - op.matvec(x)
    s = op.rmatvec(r)
    p = s.copy()
    gamma = float(s @ s)
    hist = History(stop)
    if gamma == 0.0:
        return hist.finish(x, "converged")
    for k in range(stop.max_iters):
        q = op.matvec(p)
        qq = float(q @ q)
        if qq == 0.0:
            return hist.finish(x, "breakdown")
        alpha = gamma / qq
        x = x + alpha * p
        r = r - alpha * q
        s = op.rmatvec(r)
        gamma_new = float(s @ s)
        rn = float(np.linalg.norm(r))
        if callback is not None:
            callback(k + 1, x)
        if hist.record(rn**2, rn, x):
            break
        if gamma_new == 0.0:
            return hist.finish(x, "converged")
        p = s + (gamma_new / gamma) * p
        gamma = gamma_new
    return hist.finish(x)


def landweber(A, y, step: float | None = None, stop: StopRule = FIXED_BUDGET, x0=None,
              callback: Callback | None = None) -> SolveReport:
    """``x_{k+1} = x_k + step * A^T (y - A x_k)``; default step ``1 / sigma_1^2``.

    A step outside ``(0, 2 / sigma_1^2)`` triggers a warning and sets
    ``extras["step_violation"]``; the iteration still runs.
    """
    op, y = prepare(A, y)
    s1 = spectral_norm(A)
    if step is None:
        step = 1.0 / s1**2
    violation = not (0 < step < 2.0 / s1**2)
    if violation:
        warnings.warn(f"Landweber step {step:g} outside (0, 2/sigma_1^2 = {2 / s1**2:g})", RuntimeWarning)
    x = np.zeros(op.shape[1]) if x0 is None else np.array(x0, dtype=float)
    hist = History(stop)
    for k in range(stop.max_iters):
        r = y - op.matvec(x)
        x = x + step * op.rmatvec(r)
        r = y - op.matvec(x)
        rn = float(np.linalg.norm(r))
        if callback is not None:
            callback(k + 1, x)
        if hist.record(rn**2, rn, x):
            break
    return hist.finish(x, step=step, step_violation=violation)


def disappearing_tikhonov(A, y, lam: float, stop: StopRule = FIXED_BUDGET, x0=None) -> SolveReport:
    """Iterated Tikhonov with the previous iterate as reference value.

    ``x_k = argmin ||A x - y||^2 + lam^2 ||x - x_{k-1}||^2``. The proximal
    term ``||x_k - x_{k-1}||^2`` is kept in ``extras["proximal"]``.
    """
    if lam <= 0:
        raise DomainError("lambda must be positive")
    M = as_matrix(A, "A")
    _, y = prepare(M, y)
    n = M.shape[1]
    G = M.T @ M + lam**2 * np.eye(n)
    fac = sla.cho_factor(G)
    Aty = M.T @ y
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    hist = History(stop)
    prox = []
    for _ in range(stop.max_iters):
        x_new = sla.cho_solve(fac, Aty + lam**2 * x)
        d = x_new - x
        prox.append(float(d @ d))
        x = x_new
        r = M @ x - y
        rn = float(np.linalg.norm(r))
        if hist.record(rn**2 + lam**2 * prox[-1], rn, x):
            break
    return hist.finish(x, proximal=np.array(prox))
