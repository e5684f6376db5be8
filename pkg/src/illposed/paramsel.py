"""Choosing the regularization parameter: L-curve, GCV and the discrepancy principle."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import DomainError, IllPosedError, SvdFactors, as_matrix, as_vector, svd
from .regmat import RegularizerSpec
from .solvers.direct import tikhonov_general
from .spectral import filter_factors, residual_and_norm, tikhonov_svd_solve


class BracketError(IllPosedError, ValueError):
    """The residual does not cross the target inside the bracket."""


@dataclass(frozen=True)
class LCurve:
    lambdas: np.ndarray
    residual_norm: np.ndarray
    solution_norm: np.ndarray
    curvature: np.ndarray
    corner_index: int

    @property
    def corner_lambda(self) -> float:
        return float(self.lambdas[self.corner_index])


@dataclass(frozen=True)
class GcvResult:
    lambdas: np.ndarray
    G: np.ndarray
    lambda_star: float
    index: int


@dataclass
class TikhonovProblem:
    """A linear problem ``(A, y)`` with a regularization matrix ``L``.

    When ``L`` is the identity the residual and solution norms come from an
    SVD computed once; otherwise every grid point is a direct solve.
    """

    A: np.ndarray
    y: np.ndarray
    L: np.ndarray | None = None
    factors: SvdFactors | None = None

    def __post_init__(self):
        self.A = as_matrix(self.A, "A")
        self.y = as_vector(self.y, "y")
        if self.L is not None:
            self.L = as_matrix(self.L, "L")
        if self.L is None and self.factors is None:
            self.factors = svd(self.A)

    def solve(self, lam: float) -> np.ndarray:
        if self.L is None:
            return tikhonov_svd_solve(self.factors, self.y, lam)
        return tikhonov_general(self.A, self.y, RegularizerSpec(self.L, lam))

    def norms(self, lam: float) -> tuple[float, float]:
        """Residual norm ``||A x - y||`` and (semi)norm ``||L x||`` at ``lam``."""
        if self.L is None:
            return residual_and_norm(self.factors, self.y, filter_factors(self.factors.sigmas, lam))
        x = self.solve(lam)
        return float(np.linalg.norm(self.A @ x - self.y)), float(np.linalg.norm(self.L @ x))

    def residual_norm(self, lam: float) -> float:
        return self.norms(lam)[0]


def log_grid(lo: float, hi: float, n: int) -> np.ndarray:
    if not (0 < lo < hi) or n < 2:
        raise DomainError("log grid needs 0 < lo < hi and n >= 2")
    return np.logspace(np.log10(lo), np.log10(hi), int(n))


def _check_grid(grid, min_len: int) -> np.ndarray:
    g = np.asarray(grid, dtype=float)
    if g.ndim != 1 or g.size < min_len:
        raise DomainError(f"grid needs at least {min_len} values")
    if np.any(g <= 0) or np.any(np.diff(g) <= 0):
        raise DomainError("grid must be positive and strictly increasing")
    return g


def discrete_curvature(px: np.ndarray, py: np.ndarray) -> np.ndarray:
    """Signed curvature of the circle through each interior triple of points; endpoints get ``-inf``.

    The sign is positive when the polyline turns counter-clockwise, which for
    an L-curve traversed with increasing lambda is the convex corner.
    """
    k = np.full(px.size, -np.inf)
    for i in range(1, px.size - 1):
        x1, y1, x2, y2, x3, y3 = px[i - 1], py[i - 1], px[i], py[i], px[i + 1], py[i + 1]
        cross = (x2 - x1) * (y3 - y1) - (y2 - y1) * (x3 - x1)
        a = np.hypot(x2 - x1, y2 - y1)
        b = np.hypot(x3 - x2, y3 - y2)
        c = np.hypot(x3 - x1, y3 - y1)
        denom = a * b * c
        k[i] = 2.0 * cross / denom if denom > 0 else 0.0
    return k


def lcurve(problem: TikhonovProblem, lambda_grid) -> LCurve:
    grid = _check_grid(lambda_grid, 5)
    pts = np.array([problem.norms(lam) for lam in grid])
    res, sol = pts[:, 0], pts[:, 1]
    if np.any(res <= 0) or np.any(sol <= 0):
        raise DomainError("L-curve needs positive residual and solution norms")
    # going right (larger residual) and down (smaller norm) the corner turns left
    kappa = discrete_curvature(np.log(res), np.log(sol))
    return LCurve(grid, res, sol, kappa, int(np.argmax(kappa)))


def gcv_trace(factors: SvdFactors, lam: float) -> float:
    """``Tr(I - A A^#_lam) = m - sum phi_i``."""
    m = factors.shape[0]
    return float(m - filter_factors(factors.sigmas, lam).sum())


def gcv(problem: TikhonovProblem, lambda_grid) -> GcvResult:
    """``G(lam) = m ||A x_lam - y||^2 / (m - sum phi_i)^2``, minimized over the grid."""
    if problem.L is not None:
        raise DomainError("GCV here needs the standard-form (L = I) problem")
    grid = _check_grid(lambda_grid, 2)
    f = problem.factors
    m = f.shape[0]
    G = np.empty(grid.size)
    for i, lam in enumerate(grid):
        tr = gcv_trace(f, lam)
        if tr <= 0:
            raise DomainError(f"degenerate GCV denominator at lambda={lam:g}")
        rn, _ = problem.norms(lam)
        G[i] = m * rn**2 / tr**2
    idx = int(np.argmin(G))
    return GcvResult(grid, G, float(grid[idx]), idx)


def discrepancy(residual_norm: Callable[[float], float] | TikhonovProblem, delta_norm: float,
                bracket: tuple[float, float], rtol: float = 1e-6, max_iters: int = 500) -> float:
    """Bisection in ``log lam`` for ``||A x_lam - y|| = delta_norm``.

    Ends when ``| ||A x_lam - y|| - delta | <= rtol * delta``.
    """
    if isinstance(residual_norm, TikhonovProblem):
        residual_norm = residual_norm.residual_norm
    if delta_norm <= 0:
        raise DomainError("noise norm must be positive")
    lo, hi = map(float, bracket)
    if not 0 < lo < hi:
        raise BracketError("bracket must satisfy 0 < lo < hi")
    r_lo, r_hi = residual_norm(lo), residual_norm(hi)
    if not (r_lo < delta_norm < r_hi):
        raise BracketError(
            f"residual at bracket ends ({r_lo:g}, {r_hi:g}) does not straddle delta={delta_norm:g}")
    a, b = np.log(lo), np.log(hi)
    for _ in range(max_iters):
        mid = 0.5 * (a + b)
        lam = float(np.exp(mid))
        r = residual_norm(lam)
        if abs(r - delta_norm) <= rtol * delta_norm:
            return lam
        if r < delta_norm:
            a = mid
        else:
            b = mid
    raise BracketError("bisection did not reach the tolerance")
