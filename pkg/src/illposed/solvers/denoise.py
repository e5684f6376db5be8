"""Denoiser-driven regularization: RED (three schemes) and plug-and-play ADMM."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg as sla
from scipy.ndimage import median_filter

from ..core import DimensionError, DomainError, as_matrix
from ..operators import devectorize, vectorize
from .base import History, SolveReport, StopRule, prepare

RED_SCHEMES = ("fixed_point", "steepest", "admm")


@dataclass(frozen=True)
class Denoiser:
    fn: Callable[[np.ndarray], np.ndarray]
    name: str

    def __call__(self, X: np.ndarray) -> np.ndarray:
        out = self.fn(X)
        if out.shape != X.shape:
            raise DimensionError(f"denoiser {self.name} changed shape {X.shape} -> {out.shape}")
        return out

    def on_vector(self, x: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
        return vectorize(self(devectorize(x, *shape)))


def median_denoiser(window_h: int = 5, window_w: int = 5) -> Denoiser:
    """Per-pixel median over a window, replicating the border pixels."""
    if window_h < 1 or window_w < 1 or window_h % 2 == 0 or window_w % 2 == 0:
        raise DomainError("median window sides must be odd and positive")
    return Denoiser(lambda X: median_filter(np.asarray(X, dtype=float), size=(window_h, window_w), mode="nearest"),
                    f"median{window_h}x{window_w}")


identity_denoiser = Denoiser(lambda X: np.array(X, dtype=float), "identity")


def red_objective(A, y, lam, x, fx) -> float:
    r = A @ x - y
    return float(r @ r) + 0.5 * lam**2 * float(x @ (x - fx))


def red_gradient(A, y, lam, x, fx) -> np.ndarray:
    """Gradient under the RED convention ``d/dx [x^T (x - f(x)) / 2] = x - f(x)``."""
    return 2.0 * A.T @ (A @ x - y) + lam**2 * (x - fx)


def _square_shape(n: int, shape) -> tuple[int, int]:
    if shape is not None:
        if shape[0] * shape[1] != n:
            raise DimensionError("image shape does not match the unknowns")
        return tuple(shape)
    s = int(round(np.sqrt(n)))
    if s * s != n:
        raise DimensionError("pass an explicit image shape for non-square images")
    return s, s


def red(A, y, lam: float, denoiser: Denoiser, scheme: str = "fixed_point",
        stop: StopRule | None = None, shape: tuple[int, int] | None = None,
        beta: float | None = None, x0=None, tol: float = 1e-8) -> SolveReport:
    """Regularization by denoising, objective ``||A x - y||^2 + (lam^2 / 2) x^T (x - f(x))``.

    Schemes:

    * ``fixed_point``: ``(2 A^T A + lam^2 I) x_{k+1} = 2 A^T y + lam^2 f(x_k)``
    * ``steepest``: steps along the RED gradient ``g`` with length
      ``g^T g / g^T (2 A^T A + lam^2 I) g`` (exact for the model with ``f(x)`` frozen)
    * ``admm``: split ``x = v`` with penalty ``beta`` (default ``lam^2``), one
      fixed-point sweep for the ``v`` subproblem per iteration

    Iteration stops once the relative change of ``x`` drops below ``tol``
    (for ADMM the split gap ``x - v`` and the change of ``v`` must too).
    """
    if scheme not in RED_SCHEMES:
        raise DomainError(f"unknown RED scheme {scheme!r}; expected one of {RED_SCHEMES}")
    if lam < 0:
        raise DomainError("lambda must be non-negative")
    stop = stop or StopRule(max_iters=500, rel_tol=0.0)
    M = as_matrix(A, "A")
    _, y = prepare(M, y)
    n = M.shape[1]
    shape = _square_shape(n, shape)
    lam2 = lam**2
    f = lambda v: denoiser.on_vector(v, shape)  # noqa: E731

    Aty2 = 2.0 * M.T @ y
    AtA2 = 2.0 * M.T @ M
    x = M.T @ y if x0 is None else np.array(x0, dtype=float)
    hist = History(stop)

    if scheme == "fixed_point":
        fac = sla.cho_factor(AtA2 + lam2 * np.eye(n))
    elif scheme == "steepest":
        pass
    else:
        beta = lam2 if beta is None else beta
        if beta <= 0:
            raise DomainError("ADMM penalty must be positive")
        fac = sla.cho_factor(AtA2 + beta * np.eye(n))
        v = x.copy()
        u = np.zeros(n)

    for _ in range(stop.max_iters):
        if scheme == "fixed_point":
            x_new = sla.cho_solve(fac, Aty2 + lam2 * f(x))
        elif scheme == "steepest":
            g = red_gradient(M, y, lam, x, f(x))
            gHg = float(g @ (AtA2 @ g)) + lam2 * float(g @ g)
            x_new = x - (float(g @ g) / gHg) * g if gHg > 0 else x
        else:
            x_new = sla.cho_solve(fac, Aty2 + beta * (v - u))
            v_prev = v
            v = (lam2 * f(v) + beta * (x_new + u)) / (lam2 + beta)
            u = u + x_new - v
        change = np.linalg.norm(x_new - x)
        if scheme == "admm":
            # x alone can stall while the split has not closed
            change = max(change, np.linalg.norm(x_new - v), np.linalg.norm(v - v_prev))
        change /= max(np.linalg.norm(x_new), 1e-300)
        x = x_new
        fx = f(x)
        obj = red_objective(M, y, lam, x, fx)
        if hist.record(obj, float(np.linalg.norm(M @ x - y)), x):
            break
        if change <= tol:
            hist.reason = "converged"
            break
    fx = f(x)
    return hist.finish(x, stationarity=float(np.linalg.norm(red_gradient(M, y, lam, x, fx))))


def pnp_admm(A, y, lam: float, denoiser: Denoiser, rho: float = 1.0,
             stop: StopRule | None = None, shape: tuple[int, int] | None = None,
             tol: float = 1e-8) -> SolveReport:
    """Plug-and-play ADMM: the prox of the penalty is replaced by ``denoiser``.

    Splitting ``x = v`` with effective penalty ``rho * lam^2``:
    ``(2 A^T A + rho lam^2 I) x = 2 A^T y + rho lam^2 (v - u)``,
    ``v = f(x + u)``, ``u += x - v``. No convergence guarantee in general;
    the iteration is capped by ``stop``. The recorded objective is the data
    misfit ``||A x - y||^2`` because no explicit penalty exists.
    """
    if rho <= 0:
        raise DomainError("rho must be positive")
    if lam <= 0:
        raise DomainError("lambda must be positive")
    stop = stop or StopRule(max_iters=100, rel_tol=0.0)
    M = as_matrix(A, "A")
    _, y = prepare(M, y)
    n = M.shape[1]
    shape = _square_shape(n, shape)
    pen = rho * lam**2
    fac = sla.cho_factor(2.0 * M.T @ M + pen * np.eye(n))
    Aty2 = 2.0 * M.T @ y
    x = M.T @ y
    v = x.copy()
    u = np.zeros(n)
    hist = History(stop)
    for _ in range(stop.max_iters):
        x_new = sla.cho_solve(fac, Aty2 + pen * (v - u))
        v_prev = v
        v = denoiser.on_vector(x_new + u, shape)
        u = u + x_new - v
        change = max(np.linalg.norm(x_new - x), np.linalg.norm(x_new - v), np.linalg.norm(v - v_prev))
        change /= max(np.linalg.norm(x_new), 1e-300)
        x = x_new
        rn = float(np.linalg.norm(M @ x - y))
        if hist.record(rn**2, rn, x):
            break
        if change <= tol:
            hist.reason = "converged"
            break
    return hist.finish(x, v=v)
