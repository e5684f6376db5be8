"""Regularization matrices: identity, 1D differences and the 2D Laplacian.

The 1D matrices use unit grid spacing (no ``1/h`` factors).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.linalg import LinearOperator

from .core import DimensionError, DomainError, as_matrix, as_vector
from .operators import conv_matrix, conv_operator

L_KINDS = ("identity", "d1", "d1_invertible", "d2", "d2_reflexive")

LAPLACIAN_KERNEL = np.array([[0.0, 1.0, 0.0], [1.0, -4.0, 1.0], [0.0, 1.0, 0.0]])


@dataclass
class RegularizerSpec:
    """One penalty term ``lam**2 * ||L (x - x_ref)||^2``."""

    L: np.ndarray
    lam: float
    x_ref: np.ndarray | None = field(default=None)

    def __post_init__(self):
        self.L = as_matrix(self.L, "L")
        if not np.isfinite(self.lam) or self.lam < 0:
            raise DomainError(f"lambda must be finite and non-negative, got {self.lam}")
        n = self.L.shape[1]
        if self.x_ref is None:
            self.x_ref = np.zeros(n)
        else:
            self.x_ref = as_vector(self.x_ref, "x_ref")
            if self.x_ref.size != n:
                raise DimensionError(f"x_ref has {self.x_ref.size} entries, L has {n} columns")

    @property
    def n(self) -> int:
        return self.L.shape[1]


def build_L(kind: str, n: int) -> np.ndarray:
    """Dense regularization matrix of the given kind acting on length-``n`` vectors."""
    n = int(n)
    if kind not in L_KINDS:
        raise DomainError(f"unknown L kind {kind!r}; expected one of {L_KINDS}")
    if kind == "identity":
        if n < 1:
            raise DomainError("n must be positive")
        return np.eye(n)
    if kind.startswith("d1") and n < 2:
        raise DomainError(f"{kind} needs n >= 2, got {n}")
    if kind.startswith("d2") and n < 3:
        raise DomainError(f"{kind} needs n >= 3, got {n}")

    if kind == "d1":
        L = np.zeros((n - 1, n))
        r = np.arange(n - 1)
        L[r, r] = 1.0
        L[r, r + 1] = -1.0
    elif kind == "d1_invertible":
        # first row pins x_0; below it backward differences x_{i-1} - x_i
        L = np.zeros((n, n))
        L[0, 0] = 1.0
        r = np.arange(1, n)
        L[r, r - 1] = 1.0
        L[r, r] = -1.0
    elif kind == "d2":
        L = np.zeros((n - 2, n))
        r = np.arange(n - 2)
        L[r, r] = 1.0
        L[r, r + 1] = -2.0
        L[r, r + 2] = 1.0
    else:
        L = np.zeros((n, n))
        r = np.arange(1, n - 1)
        L[r, r - 1] = 1.0
        L[r, r] = -2.0
        L[r, r + 1] = 1.0
        L[0, :2] = (-1.0, 1.0)
        L[n - 1, n - 2 :] = (-1.0, 1.0)
    return L


def laplacian2d_operator(height: int, width: int, bc="zero") -> LinearOperator:
    """Five-point Laplacian on vectorized ``height x width`` images."""
    if height < 3 or width < 3:
        raise DomainError(f"Laplacian needs at least 3x3, got {height}x{width}")
    return conv_operator(LAPLACIAN_KERNEL, height, width, bc)


def laplacian2d_matrix(height: int, width: int, bc="zero") -> np.ndarray:
    if height < 3 or width < 3:
        raise DomainError(f"Laplacian needs at least 3x3, got {height}x{width}")
    return conv_matrix(LAPLACIAN_KERNEL, height, width, bc)


def nullspaces_intersect(A, L, rank_tol: float = 1e-10) -> bool:
    """True when ``[A; L]`` is column-rank deficient, i.e. N(A) and N(L) share a direction."""
    S = np.vstack([as_matrix(A), as_matrix(L)])
    s = np.linalg.svd(S, compute_uv=False)
    return bool(s.size < S.shape[1] or s[-1] <= rank_tol * s[0])
