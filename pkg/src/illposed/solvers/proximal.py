"""Proximal solvers for non-smooth penalties: ISTA/FISTA and ADMM (l1, TV)."""

from __future__ import annotations

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, cg

from ..core import DimensionError, DomainError, as_matrix
from .base import History, SolveReport, StopRule, prepare, spectral_norm

REG_KINDS = ("l1", "tv_aniso_2d", "tv_iso_2d")


def soft_threshold(v, t: float) -> np.ndarray:
    """``argmin_x 0.5 (x - v)^2 + t |x|`` elementwise."""
    v = np.asarray(v, dtype=float)
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def group_shrink(vh: np.ndarray, vv: np.ndarray, t: float) -> tuple[np.ndarray, np.ndarray]:
    """Prox of ``t * sum_i sqrt(vh_i^2 + vv_i^2)`` (per-pixel vector shrinkage)."""
    mag = np.hypot(vh, vv)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(mag > t, 1.0 - t / mag, 0.0)
    return scale * vh, scale * vv


def l1_objective(op, y, lam, x) -> float:
    r = op.matvec(x) - y
    return float(r @ r) + lam**2 * float(np.abs(x).sum())


def fista(A, y, lam: float, stop: StopRule | None = None, momentum: bool = True, x0=None) -> SolveReport:
    """Minimize ``||A x - y||^2 + lam^2 ||x||_1`` by proximal gradient.

    Step ``1 / (2 sigma_1^2)``, threshold ``lam^2 * step``. With momentum the
    Nesterov sequence is restarted whenever the objective would increase, so
    the recorded history is non-increasing in both modes.
    """
    stop = stop or StopRule(max_iters=5000, rel_tol=1e-12)
    op, y = prepare(A, y)
    if lam < 0:
        raise DomainError("lambda must be non-negative")
    s1 = spectral_norm(A)
    n = op.shape[1]
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    if s1 == 0:
        return History(stop).finish(x, "zero_operator")
    step = 1.0 / (2.0 * s1**2 * (1 + 1e-12))
    thr = lam**2 * step

    def prox_grad(z):
        return soft_threshold(z - step * 2.0 * op.rmatvec(op.matvec(z) - y), thr)

    hist = History(stop)
    z = x.copy()
    t = 1.0
    f_old = l1_objective(op, y, lam, x)
    restarts = 0
    for _ in range(stop.max_iters):
        x_new = prox_grad(z)
        f_new = l1_objective(op, y, lam, x_new)
        if momentum and f_new > f_old:
            restarts += 1
            t = 1.0
            x_new = prox_grad(x)
            f_new = l1_objective(op, y, lam, x_new)
        if momentum:
            t_new = 0.5 * (1 + np.sqrt(1 + 4 * t * t))
            z = x_new + ((t - 1) / t_new) * (x_new - x)
            t = t_new
        else:
            z = x_new
        x = x_new
        f_old = f_new
        rn = float(np.linalg.norm(op.matvec(x) - y))
        if hist.record(f_new, rn, x):
            break
    return hist.finish(x, step=step, restarts=restarts)


def ista(A, y, lam: float, stop: StopRule | None = None, x0=None) -> SolveReport:
    return fista(A, y, lam, stop, momentum=False, x0=x0)


def _neumann_d1(n: int) -> sp.csr_matrix:
    """Forward differences with a zero last row (n x n)."""
    if n == 1:
        return sp.csr_matrix((1, 1))
    main = -np.ones(n)
    main[-1] = 0.0
    return sp.diags([main, np.ones(n - 1)], [0, 1], shape=(n, n), format="csr")


def gradient_2d(height: int, width: int) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """Horizontal and vertical forward-difference matrices on column-stacked images."""
    Dv = sp.kron(sp.identity(width), _neumann_d1(height), format="csr")
    Dh = sp.kron(_neumann_d1(width), sp.identity(height), format="csr")
    return Dh, Dv


def tv_value(x, height: int, width: int, isotropic: bool = False) -> float:
    Dh, Dv = gradient_2d(height, width)
    gh, gv = Dh @ x, Dv @ x
    if isotropic:
        return float(np.hypot(gh, gv).sum())
    return float(np.abs(gh).sum() + np.abs(gv).sum())


def _x_solver(op, D, rho: float, dense_A: np.ndarray | None):
    """Return ``solve(rhs)`` for ``(2 A^T A + rho D^T D) x = rhs``."""
    DtD = (D.T @ D)
    if dense_A is not None:
        DtD = DtD.toarray() if sp.issparse(DtD) else np.asarray(DtD)
        K = 2.0 * dense_A.T @ dense_A + rho * DtD
        try:
            fac = sla.cho_factor(K)
            return lambda rhs, x0: sla.cho_solve(fac, rhs)
        except np.linalg.LinAlgError:
            lu = sla.lu_factor(K)
            return lambda rhs, x0: sla.lu_solve(lu, rhs)
    n = op.shape[1]
    K = LinearOperator((n, n), matvec=lambda v: 2.0 * op.rmatvec(op.matvec(v)) + rho * (DtD @ v), dtype=float)

    def solve(rhs, x0):
        x, _ = cg(K, rhs, x0=x0, rtol=1e-12, atol=0.0, maxiter=10 * n)
        return x

    return solve


def admm(A, y, lam: float, rho: float = 1.0, reg_kind: str = "l1", L=None,
         shape: tuple[int, int] | None = None, stop: StopRule | None = None,
         tol: float = 1e-10) -> SolveReport:
    """ADMM for ``||A x - y||^2 + lam^2 R(D x)`` with the split ``z = D x``.

    ``reg_kind`` is ``"l1"`` (``D = L``, identity by default),
    ``"tv_aniso_2d"`` (``R = ||D_h x||_1 + ||D_v x||_1``) or ``"tv_iso_2d"``
    (``R = sum sqrt((D_h x)^2 + (D_v x)^2)``); TV needs the image ``shape``.
    Scaled-dual form with penalty ``rho``. The primal residual ``||Dx - z||``
    and dual residual ``rho ||D^T (z - z_prev)||`` are kept in ``extras``;
    iteration ends early once both fall below ``tol`` relative to their scale.
    """
    stop = stop or StopRule(max_iters=2000, rel_tol=0.0)
    if rho <= 0:
        raise DomainError("rho must be positive")
    if lam < 0:
        raise DomainError("lambda must be non-negative")
    if reg_kind not in REG_KINDS:
        raise DomainError(f"unknown regularizer {reg_kind!r}; expected one of {REG_KINDS}")
    op, y = prepare(A, y)
    n = op.shape[1]
    dense_A = as_matrix(A) if isinstance(A, np.ndarray) else None

    if reg_kind == "l1":
        D = sp.identity(n, format="csr") if L is None else sp.csr_matrix(as_matrix(L, "L"))
        if D.shape[1] != n:
            raise DimensionError("L does not act on the unknowns")
        npix = None
    else:
        if shape is None or shape[0] * shape[1] != n:
            raise DimensionError("TV needs an image shape matching the unknowns")
        Dh, Dv = gradient_2d(*shape)
        D = sp.vstack([Dh, Dv], format="csr")
        npix = n

    def reg_value(x):
        d = D @ x
        if reg_kind == "tv_iso_2d":
            return float(np.hypot(d[:npix], d[npix:]).sum())
        return float(np.abs(d).sum())

    def prox(v):
        t = lam**2 / rho
        if reg_kind == "tv_iso_2d":
            return np.concatenate(group_shrink(v[:npix], v[npix:], t))
        return soft_threshold(v, t)

    solve = _x_solver(op, D, rho, dense_A)
    Aty2 = 2.0 * op.rmatvec(y)
    x = np.zeros(n)
    z = D @ x
    u = np.zeros_like(z)
    hist = History(stop)
    primal, dual = [], []
    for _ in range(stop.max_iters):
        x = solve(Aty2 + rho * (D.T @ (z - u)), x)
        Dx = D @ x
        z_prev = z
        z = prox(Dx + u)
        u = u + Dx - z
        primal.append(float(np.linalg.norm(Dx - z)))
        dual.append(float(rho * np.linalg.norm(D.T @ (z - z_prev))))
        r = op.matvec(x) - y
        rn = float(np.linalg.norm(r))
        if hist.record(rn**2 + lam**2 * reg_value(x), rn, x):
            break
        p_scale = max(np.linalg.norm(Dx), np.linalg.norm(z), 1e-300)
        d_scale = max(rho * np.linalg.norm(D.T @ u), 1e-300)
        if primal[-1] <= tol * p_scale and dual[-1] <= tol * d_scale:
            hist.reason = "converged"
            break
    return hist.finish(x, primal_residual=np.array(primal), dual_residual=np.array(dual))
