"""Linear regression: OLS, ridge (with its bias-variance curve), LASSO, elastic net."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DimensionError, DomainError, as_matrix, as_vector, pinv_left
from .solvers.base import StopRule
from .solvers.direct import tikhonov_classic
from .solvers.proximal import admm, fista

DESIGN_KINDS = ("poly", "trig")


def build_design(kind: str, t, degree: int = 1, freqs=(1,)) -> np.ndarray:
    """Design matrix on nodes ``t``.

    ``poly``: columns ``t^0 .. t^degree``. ``trig``: ``cos(k t), sin(k t)``
    interleaved for each ``k`` in ``freqs``.
    """
    t = np.asarray(t, dtype=float).ravel()
    if t.size == 0:
        raise DomainError("design needs at least one node")
    if kind == "poly":
        if degree < 0:
            raise DomainError("degree must be non-negative")
        return np.vander(t, int(degree) + 1, increasing=True)
    if kind == "trig":
        cols = []
        for k in freqs:
            cols += [np.cos(k * t), np.sin(k * t)]
        X = np.column_stack(cols)
        if np.any(np.all(X == 0, axis=0)):
            raise DomainError("trigonometric design has an all-zero column")
        return X
    raise DomainError(f"unknown design kind {kind!r}; expected one of {DESIGN_KINDS}")


def ols(X, y) -> np.ndarray:
    X = as_matrix(X, "X")
    y = as_vector(y, "y")
    if X.shape[0] != y.size:
        raise DimensionError("X and y disagree")
    return pinv_left(X) @ y


def ridge(X, y, lam: float) -> np.ndarray:
    """``argmin ||X b - y||^2 + lam^2 ||b||^2``; ``lam = 0`` falls back to OLS."""
    if lam < 0:
        raise DomainError("lambda must be non-negative")
    if lam == 0:
        return ols(X, y)
    return tikhonov_classic(X, y, lam)


def lasso(X, y, lam: float, stop: StopRule | None = None) -> np.ndarray:
    """``argmin ||X b - y||^2 + lam^2 ||b||_1``. Zero once ``lam^2 >= max |2 X^T y|``."""
    return fista(as_matrix(X), y, lam, stop).x


def elastic_net(X, y, l1: float, l2: float, stop: StopRule | None = None) -> np.ndarray:
    """``argmin ||X b - y||^2 + l1^2 ||b||_1 + l2^2 ||b||^2`` via the augmented design ``[X; l2 I]``."""
    X = as_matrix(X, "X")
    y = as_vector(y, "y")
    p = X.shape[1]
    Xa = np.vstack([X, l2 * np.eye(p)])
    ya = np.concatenate([y, np.zeros(p)])
    return fista(Xa, ya, l1, stop).x


def gen_lasso(X, y, L, lam: float, rho: float = 1.0, stop: StopRule | None = None) -> np.ndarray:
    """``argmin ||X b - y||^2 + lam^2 ||L b||_1`` by ADMM."""
    return admm(as_matrix(X), y, lam, rho=rho, reg_kind="l1", L=L, stop=stop).x


@dataclass(frozen=True)
class BiasVariance:
    lambdas: np.ndarray
    variance: np.ndarray
    bias2: np.ndarray

    @property
    def mse(self) -> np.ndarray:
        return self.variance + self.bias2


def ridge_bias_variance(X, beta_true, noise_var: float, lambda_grid) -> BiasVariance:
    """Closed-form ridge variance and squared bias for ``b = (X^T X + lam I)^{-1} X^T y``.

    Here ``lam`` enters unsquared: ``variance = s^2 sum sigma_i^2 / (sigma_i^2 + lam)^2``
    and ``bias^2 = lam^2 beta^T (X^T X + lam I)^{-2} beta``. The solver
    family's weight corresponds to ``sqrt(lam)``.
    """
    X = as_matrix(X, "X")
    beta = as_vector(beta_true, "beta_true")
    if noise_var < 0:
        raise DomainError("noise variance must be non-negative")
    grid = np.asarray(lambda_grid, dtype=float)
    if np.any(grid < 0):
        raise DomainError("lambda grid must be non-negative")
    _, s, Vt = np.linalg.svd(X, full_matrices=True)
    p = X.shape[1]
    s2 = np.zeros(p)
    s2[: s.size] = s**2
    c = Vt @ beta

    def ratio(num, lam):
        den = (s2 + lam) ** 2
        return np.divide(num, den, out=np.zeros_like(num), where=den > 0)

    var = np.array([noise_var * np.sum(ratio(s2, lam)) for lam in grid])
    bias2 = np.array([lam**2 * np.sum(ratio(c**2, lam)) for lam in grid])
    return BiasVariance(grid, var, bias2)


def ridge_unsquared(X, y, lam: float) -> np.ndarray:
    """Ridge in the unsquared convention ``(X^T X + lam I)^{-1} X^T y``."""
    return ridge(X, y, np.sqrt(lam))
