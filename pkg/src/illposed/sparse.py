"""Dictionaries, synthesis-prior and projected solvers, and a compressed-sensing harness."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft
from scipy.sparse.linalg import LinearOperator

from .core import DimensionError, DomainError, as_matrix, as_vector
from .operators import as_operator, noise_rng, to_dense
from .solvers.base import StopRule
from .solvers.direct import tikhonov_classic
from .solvers.proximal import admm, fista


@dataclass(frozen=True)
class Dictionary:
    """Synthesis operator ``x = D s``; ``orthonormal`` promises ``D^T D = I``."""

    op: LinearOperator
    orthonormal: bool = False
    name: str = "custom"

    @property
    def shape(self) -> tuple[int, int]:
        return self.op.shape

    def synthesize(self, s) -> np.ndarray:
        return self.op.matvec(as_vector(s))

    def analyze(self, x) -> np.ndarray:
        """``D^T x`` (the coefficients when D is orthonormal)."""
        return self.op.rmatvec(as_vector(x))

    def dense(self) -> np.ndarray:
        return to_dense(self.op)


def as_dictionary(D) -> Dictionary:
    if isinstance(D, Dictionary):
        return D
    M = as_matrix(D, "D")
    ortho = M.shape[0] >= M.shape[1] and np.allclose(M.T @ M, np.eye(M.shape[1]), atol=1e-10)
    return Dictionary(as_operator(M), ortho)


def identity_dictionary(n: int) -> Dictionary:
    return Dictionary(as_operator(np.eye(n)), True, "identity")


def dct_dictionary(n: int) -> Dictionary:
    """Orthonormal DCT-II basis; column ``k`` is the ``k``-th cosine atom."""
    if n < 2:
        raise DomainError("DCT dictionary needs n >= 2")
    D = sfft.idct(np.eye(n), norm="ortho", axis=0)
    return Dictionary(as_operator(D), True, f"dct{n}")


def dct2_dictionary(height: int, width: int) -> Dictionary:
    """Separable 2D DCT-II basis on column-stacked images, applied matrix-free."""
    if height < 2 or width < 2:
        raise DomainError("DCT dictionary needs sides >= 2")
    n = height * width

    def synth(s):
        S = np.reshape(s, (height, width), order="F")
        return sfft.idctn(S, norm="ortho").ravel(order="F")

    def anal(x):
        X = np.reshape(x, (height, width), order="F")
        return sfft.dctn(X, norm="ortho").ravel(order="F")

    op = LinearOperator((n, n), matvec=synth, rmatvec=anal, dtype=float)
    return Dictionary(op, True, f"dct{height}x{width}")


def _compose(A, D: Dictionary) -> LinearOperator:
    op = as_operator(A)
    if op.shape[1] != D.shape[0]:
        raise DimensionError("operator and dictionary sizes disagree")
    return LinearOperator((op.shape[0], D.shape[1]),
                          matvec=lambda s: op.matvec(D.op.matvec(np.ravel(s))),
                          rmatvec=lambda r: D.op.rmatvec(op.rmatvec(np.ravel(r))), dtype=float)


def synthesis_solve(A, y, D, lam: float, solver: str = "fista", stop: StopRule | None = None,
                    rho: float = 1.0) -> dict:
    """Minimize ``||A D s - y||^2 + lam^2 ||s||_1``; returns ``s``, ``x = D s`` and the solver report."""
    if lam <= 0:
        raise DomainError("lambda must be positive")
    D = as_dictionary(D)
    B = _compose(A, D)
    if solver == "fista":
        rep = fista(B, y, lam, stop)
    elif solver == "admm":
        rep = admm(to_dense(B), y, lam, rho=rho, stop=stop)
    else:
        raise DomainError(f"unknown solver {solver!r}")
    return {"s": rep.x, "x": D.synthesize(rep.x), "report": rep}


def projected_tikhonov(A, y, D, lam: float) -> dict:
    """Tikhonov restricted to ``range(D)``: ``min ||A D s - y||^2 + lam^2 ||s||^2``."""
    if lam <= 0:
        raise DomainError("lambda must be positive")
    D = as_dictionary(D)
    B = to_dense(_compose(A, D))
    s = tikhonov_classic(B, y, lam)
    return {"s": s, "x": D.synthesize(s)}


def standard_form_transform(A, y, M, lam: float, cond_limit: float = 1e10) -> np.ndarray:
    """Tikhonov in the variable ``xbar = M x``: solve for ``xbar`` with ``A M^{-1}``, map back."""
    A = as_matrix(A, "A")
    M = as_matrix(M, "M")
    if M.shape[0] != M.shape[1] or M.shape[0] != A.shape[1]:
        raise DimensionError("M must be square and act on the unknowns")
    sv = np.linalg.svd(M, compute_uv=False)
    if not sv[-1] > 0 or sv[0] / sv[-1] > cond_limit:
        raise DomainError("M is too close to singular")
    A_bar = np.linalg.solve(M.T, A.T).T
    x_bar = tikhonov_classic(A_bar, y, lam)
    return np.linalg.solve(M, x_bar)


def support(v, rel_tol: float = 1e-3) -> np.ndarray:
    v = np.abs(np.asarray(v, dtype=float))
    if v.max() == 0:
        return np.zeros(0, dtype=int)
    return np.flatnonzero(v > rel_tol * v.max())


def support_f1(found, truth) -> float:
    a, b = set(map(int, found)), set(map(int, truth))
    if not a and not b:
        return 1.0
    tp = len(a & b)
    if tp == 0:
        return 0.0
    prec, rec = tp / len(a), tp / len(b)
    return 2 * prec * rec / (prec + rec)


def l1_homotopy(B, y, lam_final: float | None = None, shrink: float = 0.3,
                stage_iters: int = 2000, final_ratio: float = 1e-8) -> np.ndarray:
    """Basis-pursuit surrogate: FISTA along a decreasing ``lam^2`` path with warm starts.

    The path starts at ``max |2 B^T y|`` (above which the solution is zero)
    and stops at ``lam_final^2`` (default ``final_ratio`` times the start).
    """
    op = as_operator(B)
    y = as_vector(y)
    lam2_max = float(np.abs(2.0 * op.rmatvec(y)).max())
    if lam2_max == 0:
        return np.zeros(op.shape[1])
    lam2_end = lam_final**2 if lam_final is not None else final_ratio * lam2_max
    lam2 = lam2_max * shrink
    s = None
    while True:
        lam2 = max(lam2, lam2_end)
        s = fista(op, y, np.sqrt(lam2), StopRule(max_iters=stage_iters, rel_tol=1e-13), x0=s).x
        if lam2 <= lam2_end:
            return s
        lam2 *= shrink


@dataclass
class CsResult:
    x_hat: np.ndarray
    s_hat: np.ndarray
    x_pinv: np.ndarray
    x_true: np.ndarray
    metrics: dict = field(default_factory=dict)


def gaussian_sensing(m: int, n: int, seed) -> np.ndarray:
    """``m x n`` matrix with i.i.d. ``N(0, 1/m)`` entries."""
    return noise_rng(seed).normal(0.0, 1.0 / np.sqrt(m), size=(m, n))


def cs_recover(s_true, D, m: int, seed=0, lam: float | None = None, **homotopy) -> CsResult:
    """Sense ``x = D s`` with a seeded Gaussian ``Phi`` and recover it by l1 synthesis.

    ``lam=None`` runs the small-lambda homotopy (basis pursuit surrogate);
    otherwise a single FISTA solve at ``lam``. The minimum-norm solution
    ``Phi^T (Phi Phi^T)^{-1} y`` is returned alongside for comparison.
    """
    D = as_dictionary(D)
    s_true = as_vector(s_true, "s_true")
    n = D.shape[0]
    if not 0 < m < n:
        raise DomainError("need 0 < m < n")
    x_true = D.synthesize(s_true)
    Phi = gaussian_sensing(m, n, seed)
    y = Phi @ x_true
    B = _compose(Phi, D)
    if lam is None:
        s_hat = l1_homotopy(B, y, **homotopy)
    else:
        s_hat = fista(B, y, lam, StopRule(max_iters=homotopy.get("stage_iters", 5000), rel_tol=1e-13)).x
    x_hat = D.synthesize(s_hat)
    x_pinv = Phi.T @ np.linalg.solve(Phi @ Phi.T, y)
    true_supp = support(s_true, 1e-12)
    found = support(s_hat)
    xn = max(np.linalg.norm(x_true), 1e-300)
    metrics = {
        "m": m,
        "n": n,
        "recovery_error": float(np.linalg.norm(x_hat - x_true) / xn),
        "support_f1": support_f1(found, true_supp),
        "exact_support": bool(set(found.tolist()) == set(true_supp.tolist())),
        "mse_l1": float(np.mean((x_hat - x_true) ** 2)),
        "mse_pinv": float(np.mean((x_pinv - x_true) ** 2)),
    }
    return CsResult(x_hat, s_hat, x_pinv, x_true, metrics)
