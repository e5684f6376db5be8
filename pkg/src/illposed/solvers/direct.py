"""One-shot solvers for quadratic (Tikhonov-type) functionals.

Every functional carries the regularization weight squared,
``||A x - y||^2 + sum_i lam_i^2 ||L_i (x - x_i*)||^2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import warnings

import numpy as np
import scipy.linalg as sla

from ..core import DimensionError, DomainError, SingularityError, as_matrix, as_vector
from ..regmat import RegularizerSpec

COND_LIMIT = 1e12


def _check_dims(A: np.ndarray, y: np.ndarray) -> None:
    if A.shape[0] != y.size:
        raise DimensionError(f"A has {A.shape[0]} rows, y has {y.size} entries")


def _regs(regs, n: int) -> list[RegularizerSpec]:
    if isinstance(regs, RegularizerSpec):
        regs = [regs]
    regs = list(regs)
    for r in regs:
        if r.n != n:
            raise DimensionError(f"regularizer acts on {r.n} unknowns, A has {n} columns")
    return regs


def _stacked(A, y, regs):
    blocks = [A] + [r.lam * r.L for r in regs]
    rhs = [y] + [r.lam * (r.L @ r.x_ref) for r in regs]
    return np.vstack(blocks), np.concatenate(rhs)


def _lstsq_full_rank(S: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Least squares by QR with an explicit column-rank check."""
    if S.shape[0] < S.shape[1]:
        raise SingularityError("stacked system has fewer rows than unknowns")
    Q, R = np.linalg.qr(S)
    d = np.abs(np.diag(R))
    if d.max() == 0 or d.min() <= 1e-14 * d.max():
        raise SingularityError("stacked system is column-rank deficient")
    return sla.solve_triangular(R, Q.T @ b)


def solve_spd(G: np.ndarray, rhs: np.ndarray, fallback=None) -> np.ndarray:
    """Cholesky solve of a symmetric positive (semi)definite system.

    When the estimated condition number exceeds ``COND_LIMIT`` (or Cholesky
    fails) ``fallback()`` is returned instead; without a fallback a
    :class:`SingularityError` is raised.
    """
    try:
        c, low = sla.cho_factor(G, lower=False, check_finite=False)
        anorm = np.abs(G).sum(axis=0).max()
        rcond, info = sla.lapack.dpocon(c, anorm)
        ok = info == 0 and rcond * COND_LIMIT > 1.0
    except np.linalg.LinAlgError:
        ok = False
    if ok:
        return sla.cho_solve((c, low), rhs, check_finite=False)
    if fallback is not None:
        return fallback()
    raise SingularityError("normal-equation matrix is singular within tolerance")


def naive_solve(A, y, rank_tol: float = 1e-14) -> np.ndarray:
    """Solve the square system ``A x = y`` with no stabilization whatsoever.

    Raises :class:`SingularityError` when the LU-based reciprocal condition
    estimate falls below ``rank_tol``.
    """
    A = as_matrix(A, "A")
    y = as_vector(y, "y")
    _check_dims(A, y)
    if A.shape[0] != A.shape[1]:
        raise DimensionError("naive solve needs a square operator")
    with warnings.catch_warnings():
        # singularity is reported below through the condition estimate
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(A, check_finite=False)
    rcond, _ = sla.lapack.dgecon(lu, np.abs(A).sum(axis=0).max(), norm="1")
    if not rcond > rank_tol:
        raise SingularityError("operator is singular within tolerance")
    return sla.lu_solve((lu, piv), y, check_finite=False)


def tikhonov_multi(A, y, regs: Sequence[RegularizerSpec] | RegularizerSpec) -> np.ndarray:
    """``(A^T A + sum lam_i^2 L_i^T L_i)^{-1} (A^T y + sum lam_i^2 L_i^T L_i x_i*)``."""
    A = as_matrix(A, "A")
    y = as_vector(y, "y")
    _check_dims(A, y)
    regs = _regs(regs, A.shape[1])
    if regs and not any(r.lam > 0 for r in regs):
        raise DomainError("at least one regularization weight must be positive")
    G = A.T @ A
    rhs = A.T @ y
    for r in regs:
        LtL = r.L.T @ r.L
        G = G + r.lam**2 * LtL
        rhs = rhs + r.lam**2 * (LtL @ r.x_ref)
    return solve_spd(G, rhs, fallback=lambda: stacked_solve(A, y, regs))


def tikhonov_general(A, y, reg: RegularizerSpec) -> np.ndarray:
    if reg.lam <= 0:
        raise DomainError("lambda must be positive")
    return tikhonov_multi(A, y, [reg])


def tikhonov_classic(A, y, lam: float, x_ref=None) -> np.ndarray:
    """Classical Tikhonov with ``L = I``."""
    A = as_matrix(A, "A")
    return tikhonov_general(A, y, RegularizerSpec(np.eye(A.shape[1]), lam, x_ref))


def tikhonov_data_form(A, y, lam: float) -> np.ndarray:
    """``A^T (A A^T + lam^2 I)^{-1} y``; cheaper than the classical form when A is wide."""
    if lam <= 0:
        raise DomainError("lambda must be positive")
    A = as_matrix(A, "A")
    y = as_vector(y, "y")
    _check_dims(A, y)
    K = A @ A.T + lam**2 * np.eye(A.shape[0])
    return A.T @ solve_spd(K, y)


def stacked_solve(A, y, regs: Sequence[RegularizerSpec] | RegularizerSpec = ()) -> np.ndarray:
    """Least-squares solution of ``[A; lam_1 L_1; ...] x = [y; lam_1 L_1 x_1*; ...]``."""
    A = as_matrix(A, "A")
    y = as_vector(y, "y")
    _check_dims(A, y)
    regs = [r for r in _regs(regs, A.shape[1]) if r.lam > 0]
    S, b = _stacked(A, y, regs)
    return _lstsq_full_rank(S, b)


def quadratic_gradient(A, y, regs, x) -> np.ndarray:
    """Gradient of ``||Ax-y||^2 + sum lam^2 ||L(x-x*)||^2``."""
    A = as_matrix(A)
    g = 2.0 * A.T @ (A @ x - y)
    for r in _regs(regs, A.shape[1]):
        g = g + 2.0 * r.lam**2 * r.L.T @ (r.L @ (x - r.x_ref))
    return g


def quadratic_objective(A, y, regs, x) -> float:
    A = as_matrix(A)
    r0 = A @ x - y
    val = float(r0 @ r0)
    for r in _regs(regs, A.shape[1]):
        d = r.L @ (x - r.x_ref)
        val += r.lam**2 * float(d @ d)
    return val


def newton_step(A, y, regs, x0=None) -> np.ndarray:
    """One Newton step ``x0 - H^{-1} g(x0)`` on the quadratic functional.

    The Hessian is built explicitly and factored independently of the
    normal-equation solvers, so the result serves as a cross-check.
    """
    A = as_matrix(A, "A")
    y = as_vector(y, "y")
    n = A.shape[1]
    regs = _regs(regs, n)
    x0 = np.zeros(n) if x0 is None else as_vector(x0)
    H = 2.0 * A.T @ A
    for r in regs:
        H = H + 2.0 * r.lam**2 * r.L.T @ r.L
    g = quadratic_gradient(A, y, regs, x0)
    return x0 - sla.lu_solve(sla.lu_factor(H), g)


@dataclass
class GaussianModel:
    """Whitened Gaussian noise and prior: ``Gamma_e^{-1} = L_e^T L_e``, ``Gamma_pr^{-1} = L_pr^T L_pr``."""

    L_e: np.ndarray
    mu_e: np.ndarray
    L_pr: np.ndarray
    mu_x: np.ndarray
    lam: float = 1.0

    def __post_init__(self):
        self.L_e = as_matrix(self.L_e, "L_e")
        self.L_pr = as_matrix(self.L_pr, "L_pr")
        self.mu_e = as_vector(self.mu_e, "mu_e")
        self.mu_x = as_vector(self.mu_x, "mu_x")
        if self.lam < 0:
            raise DomainError("lambda must be non-negative")
        if self.L_e.shape[1] != self.mu_e.size:
            raise DimensionError("L_e and mu_e disagree")
        if self.L_pr.shape[1] != self.mu_x.size:
            raise DimensionError("L_pr and mu_x disagree")

    @classmethod
    def standard(cls, m: int, n: int, lam: float) -> "GaussianModel":
        return cls(np.eye(m), np.zeros(m), np.eye(n), np.zeros(n), lam)


def map_gaussian(A, y, model: GaussianModel) -> np.ndarray:
    """MAP estimate minimizing ``||L_e(Ax - y - mu_e)||^2 + lam^2 ||L_pr(x - mu_x)||^2``."""
    A = as_matrix(A, "A")
    y = as_vector(y, "y")
    _check_dims(A, y)
    if model.L_e.shape[1] != A.shape[0] or model.L_pr.shape[1] != A.shape[1]:
        raise DimensionError("whitener sizes do not match the operator")
    Aw = model.L_e @ A
    yw = model.L_e @ (y + model.mu_e)
    regs = [RegularizerSpec(model.L_pr, model.lam, model.mu_x)] if model.lam > 0 else []
    return stacked_solve(Aw, yw, regs)
