"""Iteratively reweighted least squares for lp fidelity and lp penalties."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import DimensionError, DomainError, as_matrix
from ..regmat import RegularizerSpec
from .base import History, SolveReport, StopRule, prepare
from .direct import solve_spd
from .krylov import cgls


@dataclass(frozen=True)
class IrlsConfig:
    """``epsilon`` floors ``|r_i|`` inside the weights; ``inner`` is ``"direct"`` or ``"cgls"``."""

    epsilon: float = 1e-8
    outer_iters: int = 200
    inner: str = "direct"
    inner_iters: int = 500
    tol: float = 1e-12

    def __post_init__(self):
        if not self.epsilon > 0:
            raise DomainError("epsilon must be positive")
        if self.inner not in ("direct", "cgls"):
            raise DomainError(f"unknown inner solver {self.inner!r}")
        if self.outer_iters < 1:
            raise DomainError("outer_iters must be at least 1")


def lp_weights(v: np.ndarray, p: float, eps: float) -> np.ndarray:
    """``max(|v|, eps)^(p - 2)``; the constant factor ``p`` of the true Hessian is dropped."""
    return np.maximum(np.abs(v), eps) ** (p - 2.0)


def irls_objective(A, y, x, fidelity_p, reg, reg_p) -> float:
    r = A @ x - y
    val = float(np.sum(np.abs(r) ** fidelity_p))
    if reg is not None and reg.lam > 0:
        val += reg.lam**2 * float(np.sum(np.abs(reg.L @ (x - reg.x_ref)) ** reg_p))
    return val


def irls(A, y, cfg: IrlsConfig = IrlsConfig(), fidelity_p: float = 2.0,
         reg: RegularizerSpec | None = None, reg_p: float = 2.0,
         x0=None) -> SolveReport:
    """Minimize ``||A x - y||_pf^pf + lam^2 ||L (x - x*)||_pr^pr`` by reweighting.

    Each outer step solves the weighted least-squares problem
    ``min ||W_r^(1/2) (A x - y)||^2 + (pr / pf) lam^2 ||W_l^(1/2) L (x - x*)||^2``
    whose fixed points are stationary points of the target (up to the
    ``epsilon`` smoothing). The ``pr / pf`` ratio restores the relative scale
    lost when the factor ``p`` is dropped from both weight matrices.
    """
    for p in (fidelity_p, reg_p):
        if not 0 < p <= 2:
            raise DomainError(f"p must lie in (0, 2], got {p}")
    M = as_matrix(A, "A")
    _, y = prepare(M, y)
    m, n = M.shape
    if reg is not None and reg.n != n:
        raise DimensionError("regularizer does not act on the unknowns")
    use_reg = reg is not None and reg.lam > 0
    c = (reg_p / fidelity_p) * reg.lam**2 if use_reg else 0.0

    def weighted_solve(wr, wl, x_start):
        if cfg.inner == "direct":
            G = M.T @ (wr[:, None] * M)
            rhs = M.T @ (wr * y)
            if use_reg:
                LW = reg.L.T * wl
                G = G + c * LW @ reg.L
                rhs = rhs + c * LW @ (reg.L @ reg.x_ref)
            return solve_spd(G, rhs, fallback=lambda: np.linalg.lstsq(G, rhs, rcond=None)[0])
        sr = np.sqrt(wr)
        blocks, rhs = [sr[:, None] * M], [sr * y]
        if use_reg:
            sl = np.sqrt(c * wl)
            blocks.append(sl[:, None] * reg.L)
            rhs.append(sl * (reg.L @ reg.x_ref))
        S = np.vstack(blocks)
        b = np.concatenate(rhs)
        d = cgls(S, b - S @ x_start, StopRule(max_iters=cfg.inner_iters, rel_tol=1e-14)).x
        return x_start + d

    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    hist = History(StopRule(max_iters=cfg.outer_iters, rel_tol=0.0))
    for k in range(cfg.outer_iters):
        r = M @ x - y
        wr = lp_weights(r, fidelity_p, cfg.epsilon)
        wl = lp_weights(reg.L @ (x - reg.x_ref), reg_p, cfg.epsilon) if use_reg else None
        x_new = weighted_solve(wr, wl, x)
        change = np.linalg.norm(x_new - x) / max(np.linalg.norm(x_new), 1e-300)
        x = x_new
        obj = irls_objective(M, y, x, fidelity_p, reg, reg_p)
        if hist.record(obj, float(np.linalg.norm(M @ x - y)), x):
            break
        if change <= cfg.tol:
            return hist.finish(x, "converged")
    return hist.finish(x)
