"""SVD diagnostics and spectral-filter solvers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import RANK_TOL, DimensionError, DomainError, SvdFactors, as_vector


@dataclass(frozen=True)
class PicardTable:
    sigma: np.ndarray
    coeff: np.ndarray
    ratio: np.ndarray

    def rows(self):
        for i, (s, c, r) in enumerate(zip(self.sigma, self.coeff, self.ratio), start=1):
            yield i, s, c, r


@dataclass(frozen=True)
class Classification:
    regime: str
    alpha_hat: float
    power_residual: float
    exp_residual: float


def _coefficients(f: SvdFactors, y) -> np.ndarray:
    y = as_vector(y, "y")
    m, _ = f.shape
    if y.size != m:
        raise DimensionError(f"y has {y.size} entries, operator has {m} rows")
    return f.U[:, : f.sigmas.size].T @ y


def picard_table(f: SvdFactors, y) -> PicardTable:
    """Singular values, ``|u_i^T y|`` and their ratios.

    Zero singular values give an infinite ratio (or ``nan`` when the
    coefficient is zero too).
    """
    c = np.abs(_coefficients(f, y))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = c / f.sigmas
    return PicardTable(sigma=f.sigmas.copy(), coeff=c, ratio=ratio)


def classify_illposedness(sigmas) -> Classification:
    """Label a singular-value decay as mild, moderate or severe.

    Fits ``log s_i = a - alpha log i`` and ``log s_i = b - c i`` by least
    squares. The exponential model wins (severe) when its residual is
    smaller; otherwise ``alpha <= 1`` is mild and ``alpha > 1`` moderate.
    """
    s = np.asarray(sigmas, dtype=float)
    s = s[s > 0]
    if s.size < 8:
        raise DomainError(f"need at least 8 positive singular values, got {s.size}")
    i = np.arange(1, s.size + 1, dtype=float)
    ls = np.log(s)

    P = np.column_stack([np.ones_like(i), np.log(i)])
    cp, *_ = np.linalg.lstsq(P, ls, rcond=None)
    rp = float(np.linalg.norm(P @ cp - ls))

    E = np.column_stack([np.ones_like(i), i])
    ce, *_ = np.linalg.lstsq(E, ls, rcond=None)
    re = float(np.linalg.norm(E @ ce - ls))

    alpha = float(-cp[1])
    if re < rp:
        regime = "severe"
    else:
        regime = "mild" if alpha <= 1.0 else "moderate"
    return Classification(regime, alpha, rp, re)


def filter_factors(sigmas, lam: float = 0.0, kind: str = "tikhonov", k: int | None = None) -> np.ndarray:
    """Per-component filter factors: ``tikhonov``, ``damped`` or ``tsvd`` (needs ``k``)."""
    s = np.asarray(sigmas, dtype=float)
    if lam < 0:
        raise DomainError("lambda must be non-negative")
    if kind in ("tikhonov", "damped"):
        if lam == 0:
            return np.ones_like(s)
        # ratio form: lam**2 may underflow, and sigma = 0 must give 0 rather than 0/0
        with np.errstate(divide="ignore", over="ignore"):
            r = np.where(s > 0, lam / np.where(s > 0, s, 1.0), np.inf)
            return 1.0 / (1.0 + r**2) if kind == "tikhonov" else 1.0 / (1.0 + r)
    if kind == "tsvd":
        if k is None:
            raise DomainError("tsvd filter factors need k")
        return (np.arange(s.size) < k).astype(float)
    raise DomainError(f"unknown filter kind {kind!r}")


def filtered_solve(f: SvdFactors, y, phi) -> np.ndarray:
    """``sum_i phi_i (u_i^T y / sigma_i) v_i`` over components with ``phi_i != 0``."""
    beta = _coefficients(f, y)
    phi = np.asarray(phi, dtype=float)
    coef = np.zeros_like(beta)
    nz = phi != 0
    if np.any(f.sigmas[nz] == 0):
        raise DomainError("non-zero filter factor on a zero singular value")
    coef[nz] = phi[nz] * beta[nz] / f.sigmas[nz]
    return f.Vt[: f.sigmas.size].T @ coef


def tsvd_solve(f: SvdFactors, y, k: int, rank_tol: float = RANK_TOL) -> np.ndarray:
    r = f.rank(rank_tol)
    if not 1 <= k <= r:
        raise DomainError(f"k must lie in [1, {r}], got {k}")
    return filtered_solve(f, y, filter_factors(f.sigmas, kind="tsvd", k=k))


def tikhonov_svd_solve(f: SvdFactors, y, lam: float) -> np.ndarray:
    if lam <= 0:
        raise DomainError("lambda must be positive")
    phi = filter_factors(f.sigmas, lam, "tikhonov")
    return filtered_solve(f, y, phi)


def damped_svd_solve(f: SvdFactors, y, lam: float) -> np.ndarray:
    if lam <= 0:
        raise DomainError("lambda must be positive")
    return filtered_solve(f, y, filter_factors(f.sigmas, lam, "damped"))


def residual_and_norm(f: SvdFactors, y, phi) -> tuple[float, float]:
    """Residual norm and solution norm of a filtered solution, from SVD coefficients only."""
    beta = _coefficients(f, y)
    phi = np.asarray(phi, dtype=float)
    # the part of y outside the span of the leading columns of U is never fitted
    tail = f.U[:, f.sigmas.size :].T @ as_vector(y)
    out = float(tail @ tail)
    res = np.sqrt(float(np.sum(((1 - phi) * beta) ** 2)) + out)
    with np.errstate(divide="ignore", invalid="ignore"):
        xc = np.where(phi != 0, phi * beta / f.sigmas, 0.0)
    return float(res), float(np.linalg.norm(xc))
