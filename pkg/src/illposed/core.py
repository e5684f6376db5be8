"""Numeric substrate: finite-array checks, lp norms, SVD facade and pseudoinverses."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

RANK_TOL = 1e-12


class IllPosedError(Exception):
    """Base class for errors raised by this package."""


class DomainError(IllPosedError, ValueError):
    """An argument lies outside the domain of the operation."""


class SingularityError(IllPosedError, np.linalg.LinAlgError):
    """A matrix is rank deficient beyond the allowed tolerance."""


class DimensionError(IllPosedError, ValueError):
    """Operand shapes do not agree."""


def as_vector(v, name: str = "vector") -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1:
        arr = arr.reshape(-1)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} has non-finite entries")
    return arr


def as_matrix(A, name: str = "matrix") -> np.ndarray:
    arr = np.asarray(A, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be two-dimensional, got ndim={arr.ndim}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} has non-finite entries")
    return arr


def lp_norm(v, p: float) -> float:
    """lp norm of a vector.

    ``p >= 1`` gives the usual norm, ``0 < p < 1`` the same formula (a
    quasi-norm, not subadditive), ``p == 0`` the count of entries with
    magnitude above 1e-12 and ``p == np.inf`` the largest magnitude.
    """
    x = as_vector(v)
    if np.isnan(p) or p < 0:
        raise DomainError(f"p must be non-negative, got {p}")
    a = np.abs(x)
    if p == 0:
        return float(np.count_nonzero(a > 1e-12))
    if np.isinf(p):
        return float(a.max()) if a.size else 0.0
    if p == 1:
        return float(a.sum())
    if p == 2:
        return float(np.sqrt(np.dot(a, a)))
    return float(np.sum(a**p) ** (1.0 / p))


@dataclass(frozen=True)
class SvdFactors:
    """Full SVD ``A = U @ diag(sigmas) @ Vt`` with descending singular values."""

    U: np.ndarray
    sigmas: np.ndarray
    Vt: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.U.shape[0], self.Vt.shape[0]

    @property
    def V(self) -> np.ndarray:
        return self.Vt.T

    def rank(self, rank_tol: float = RANK_TOL) -> int:
        if self.sigmas.size == 0 or self.sigmas[0] == 0:
            return 0
        return int(np.count_nonzero(self.sigmas > rank_tol * self.sigmas[0]))

    def reconstruct(self) -> np.ndarray:
        m, n = self.shape
        k = self.sigmas.size
        return (self.U[:, :k] * self.sigmas) @ self.Vt[:k, :]


def svd(A) -> SvdFactors:
    """Full singular value decomposition with a deterministic sign convention.

    Each column of ``U`` is flipped so that its largest-magnitude entry is
    positive; the matching row of ``Vt`` is flipped with it (for the first
    ``min(m, n)`` pairs) so the product is unchanged.
    """
    M = as_matrix(A)
    U, s, Vt = np.linalg.svd(M, full_matrices=True)
    U = U.copy()
    Vt = Vt.copy()
    k = s.size
    idx = np.argmax(np.abs(U), axis=0)
    signs = np.sign(U[idx, np.arange(U.shape[1])])
    signs[signs == 0] = 1.0
    U *= signs
    Vt[:k] *= signs[:k, None]
    return SvdFactors(U=U, sigmas=s, Vt=Vt)


def condition_number(A, rank_tol: float = RANK_TOL) -> float:
    """Ratio of the largest to the smallest singular value above ``rank_tol * sigma_1``."""
    s = np.linalg.svd(as_matrix(A), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        raise DomainError("condition number of a zero matrix is undefined")
    kept = s[s > rank_tol * s[0]]
    if kept.size == 0:
        return float("inf")
    return float(s[0] / kept[-1])


def _check_gram(G: np.ndarray, rank_tol: float, what: str) -> None:
    s = np.linalg.svd(G, compute_uv=False)
    # singular values of G are squares of those of A; rank_tol**2 underflows eps
    floor = max(rank_tol**2, G.shape[0] * np.finfo(float).eps)
    if s[0] == 0 or s[-1] <= floor * s[0]:
        raise SingularityError(f"{what} is singular within tolerance")


def pinv_left(A, rank_tol: float = RANK_TOL) -> np.ndarray:
    """Left inverse ``(A^T A)^{-1} A^T`` of a full column rank matrix."""
    M = as_matrix(A)
    G = M.T @ M
    _check_gram(G, rank_tol, "A^T A")
    return np.linalg.solve(G, M.T)


def pinv_right(A, rank_tol: float = RANK_TOL) -> np.ndarray:
    """Right inverse ``A^T (A A^T)^{-1}`` of a full row rank matrix."""
    M = as_matrix(A)
    G = M @ M.T
    _check_gram(G, rank_tol, "A A^T")
    return np.linalg.solve(G, M).T
