"""Forward operators: PSFs, 2D convolution under four boundary conditions,
explicit convolution matrices, downsampling, masking and noise.

Images are 2D ``numpy`` arrays (row-major). Vectorization concatenates the
columns, i.e. ``x = X.ravel(order="F")``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, aslinearoperator

from .core import DimensionError, DomainError, as_matrix

DENSE_GUARD = 16384

PSF_KINDS = ("gaussian-iso", "gaussian-aniso", "disk", "motion")


class BoundaryCondition(str, Enum):
    ZERO = "zero"
    REPLICATE = "replicate"
    PERIODIC = "periodic"
    REFLEXIVE = "reflexive"


_PAD_MODE = {
    BoundaryCondition.ZERO: "constant",
    BoundaryCondition.REPLICATE: "edge",
    BoundaryCondition.PERIODIC: "wrap",
    BoundaryCondition.REFLEXIVE: "symmetric",
}


def _bc(bc) -> BoundaryCondition:
    try:
        return BoundaryCondition(bc)
    except ValueError:
        raise DomainError(f"unknown boundary condition {bc!r}") from None


@dataclass(frozen=True)
class Psf:
    """Normalized, non-negative convolution kernel with odd dimensions."""

    kernel: np.ndarray
    kind: str

    def __post_init__(self):
        k = np.asarray(self.kernel, dtype=float)
        if k.ndim != 2 or k.shape[0] % 2 == 0 or k.shape[1] % 2 == 0:
            raise DomainError(f"PSF kernel must be 2D with odd sides, got {k.shape}")
        if np.any(k < 0):
            raise DomainError("PSF entries must be non-negative")
        if abs(k.sum() - 1.0) > 1e-10:
            raise DomainError(f"PSF must sum to one, sums to {k.sum()}")
        object.__setattr__(self, "kernel", k)

    @property
    def shape(self) -> tuple[int, int]:
        return self.kernel.shape


def psf_build(
    kind: str,
    size: int = 5,
    sigma_x: float = 1.0,
    sigma_y: float | None = None,
    radius: float = 1.0,
    length: float = 3.0,
    angle_deg: float = 0.0,
) -> Psf:
    """Build a normalized PSF on a ``size x size`` centered grid.

    Gaussians are sampled from ``exp(-(i^2/(2 sigma_x^2) + j^2/(2 sigma_y^2)))``
    with ``i`` the horizontal (column) offset and ``j`` the vertical (row)
    offset. The disk is the indicator of ``i^2 + j^2 <= radius^2``. The motion
    kernel rasterizes a segment of the given length through the center at
    ``angle_deg`` (counter-clockwise from the horizontal axis) by rounding
    densely sampled points to the nearest pixel.
    """
    if kind not in PSF_KINDS:
        raise DomainError(f"unknown PSF kind {kind!r}; expected one of {PSF_KINDS}")
    size = int(size)
    if size < 1 or size % 2 == 0:
        raise DomainError(f"PSF size must be odd and >= 1, got {size}")
    c = size // 2
    rows, cols = np.mgrid[-c : c + 1, -c : c + 1].astype(float)

    if kind in ("gaussian-iso", "gaussian-aniso"):
        sy = sigma_x if (kind == "gaussian-iso" or sigma_y is None) else sigma_y
        if sigma_x <= 0 or sy <= 0:
            raise DomainError("Gaussian PSF needs positive sigmas")
        k = np.exp(-(cols**2 / (2 * sigma_x**2) + rows**2 / (2 * sy**2)))
    elif kind == "disk":
        if radius < 0:
            raise DomainError("disk radius must be non-negative")
        k = (cols**2 + rows**2 <= radius**2 + 1e-12).astype(float)
    else:
        if length < 0:
            raise DomainError("motion length must be non-negative")
        k = np.zeros((size, size))
        theta = np.deg2rad(angle_deg)
        npts = max(2, int(np.ceil(8 * length)) + 1)
        t = np.linspace(-length / 2, length / 2, npts)
        ci = np.rint(t * np.cos(theta)).astype(int)
        ri = np.rint(-t * np.sin(theta)).astype(int)
        keep = (np.abs(ci) <= c) & (np.abs(ri) <= c)
        k[ri[keep] + c, ci[keep] + c] = 1.0
        if not k.any():
            k[c, c] = 1.0
    return Psf(kernel=k / k.sum(), kind=kind)


def _kernel_of(H) -> np.ndarray:
    if isinstance(H, Psf):
        return H.kernel
    k = as_matrix(H, "kernel")
    if k.shape[0] % 2 == 0 or k.shape[1] % 2 == 0:
        raise DomainError(f"kernel must have odd sides, got {k.shape}")
    return k


def vectorize(X) -> np.ndarray:
    """Stack the columns of an image into a vector."""
    return np.asarray(X, dtype=float).ravel(order="F")


def devectorize(x, height: int, width: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.size != height * width:
        raise DimensionError(f"cannot reshape {x.size} entries to {height}x{width}")
    return x.reshape((height, width), order="F")


def conv2d(X, H, bc="zero") -> np.ndarray:
    """Discrete 2D convolution ``Y(i,j) = sum_{k1,k2} H(k1,k2) X(i-k1, j-k2)``.

    The kernel is indexed relative to its center; reads outside ``X`` are
    resolved by padding according to ``bc``. Output has the shape of ``X``.
    """
    X = as_matrix(X, "image")
    k = _kernel_of(H)
    bc = _bc(bc)
    kh, kw = k.shape
    h, w = X.shape
    if kh > h or kw > w:
        raise DimensionError(f"kernel {k.shape} larger than image {X.shape}")
    ch, cw = kh // 2, kw // 2
    P = np.pad(X, ((ch, ch), (cw, cw)), mode=_PAD_MODE[bc])
    Y = np.zeros_like(X)
    for a in range(kh):
        for b in range(kw):
            if k[a, b] == 0.0:
                continue
            # X(i - (a - ch), j - (b - cw)) sits at P[i + 2ch - a, j + 2cw - b]
            Y += k[a, b] * P[2 * ch - a : 2 * ch - a + h, 2 * cw - b : 2 * cw - b + w]
    return Y


def _source_index(idx: np.ndarray, n: int, bc: BoundaryCondition):
    """Map possibly out-of-range indices to in-range ones; second output marks valid reads."""
    valid = np.ones(idx.shape, dtype=bool)
    if bc is BoundaryCondition.ZERO:
        valid = (idx >= 0) & (idx < n)
        out = np.clip(idx, 0, n - 1)
    elif bc is BoundaryCondition.REPLICATE:
        out = np.clip(idx, 0, n - 1)
    elif bc is BoundaryCondition.PERIODIC:
        out = np.mod(idx, n)
    else:
        out = idx.copy()
        # mirror with the edge sample repeated: -1 -> 0, n -> n-1
        for _ in range(4):
            out = np.where(out < 0, -out - 1, out)
            out = np.where(out >= n, 2 * n - out - 1, out)
    return out, valid


def _taps(k: np.ndarray, height: int, width: int, bc: BoundaryCondition):
    """Yield ``(weight, row_src, col_src, valid)`` for each non-zero tap."""
    kh, kw = k.shape
    ch, cw = kh // 2, kw // 2
    ii = np.arange(height)
    jj = np.arange(width)
    for a in range(kh):
        ri, rv = _source_index(ii - (a - ch), height, bc)
        for b in range(kw):
            if k[a, b] == 0.0:
                continue
            cj, cv = _source_index(jj - (b - cw), width, bc)
            yield k[a, b], ri, cj, rv[:, None] & cv[None, :]


def conv_matrix(H, height: int, width: int, bc="zero") -> np.ndarray:
    """Dense matrix ``M`` with ``M @ vectorize(X) == vectorize(conv2d(X, H, bc))``.

    Built entry by entry from explicit index arithmetic, independently of the
    padding used by :func:`conv2d`.
    """
    k = _kernel_of(H)
    bc = _bc(bc)
    n = height * width
    if n > DENSE_GUARD:
        raise DimensionError(f"{height}x{width} exceeds the dense guard of {DENSE_GUARD} pixels")
    if k.shape[0] > height or k.shape[1] > width:
        raise DimensionError("kernel larger than image")
    M = np.zeros((n, n))
    out_idx = (np.arange(height)[:, None] + height * np.arange(width)[None, :])
    for wgt, ri, cj, valid in _taps(k, height, width, bc):
        src = ri[:, None] + height * cj[None, :]
        np.add.at(M, (out_idx[valid], src[valid]), wgt)
    return M


def conv_operator(H, height: int, width: int, bc="zero") -> LinearOperator:
    """Matrix-free convolution on vectorized images, with exact adjoint."""
    k = _kernel_of(H)
    bc = _bc(bc)
    if k.shape[0] > height or k.shape[1] > width:
        raise DimensionError("kernel larger than image")
    taps = list(_taps(k, height, width, bc))
    n = height * width

    def matvec(x):
        X = devectorize(np.ravel(x), height, width)
        return vectorize(conv2d(X, k, bc))

    def rmatvec(y):
        Y = devectorize(np.ravel(y), height, width)
        Z = np.zeros((height, width))
        for wgt, ri, cj, valid in taps:
            rr = np.broadcast_to(ri[:, None], (height, width))
            cc = np.broadcast_to(cj[None, :], (height, width))
            np.add.at(Z, (rr[valid], cc[valid]), wgt * Y[valid])
        return vectorize(Z)

    return LinearOperator((n, n), matvec=matvec, rmatvec=rmatvec, dtype=float)


def downsample_matrix(n: int) -> np.ndarray:
    """Pairwise averaging ``(n/2) x n`` matrix."""
    n = int(n)
    if n <= 0 or n % 2:
        raise DomainError(f"downsampling needs a positive even length, got {n}")
    D = np.zeros((n // 2, n))
    r = np.arange(n // 2)
    D[r, 2 * r] = 0.5
    D[r, 2 * r + 1] = 0.5
    return D


def super_resolution_observe(Y_blurred) -> np.ndarray:
    """Downsample a blurred square image in both directions: ``A_sub Y A_sub^T``."""
    Y = as_matrix(Y_blurred, "image")
    Dr = downsample_matrix(Y.shape[0])
    Dc = downsample_matrix(Y.shape[1])
    return Dr @ Y @ Dc.T


def mask_operator(keep_indices, n: int) -> LinearOperator:
    """Diagonal 0/1 operator keeping the listed entries (self-adjoint)."""
    idx = np.asarray(list(keep_indices), dtype=int)
    if idx.size and (idx.min() < 0 or idx.max() >= n):
        raise DomainError("mask index out of range")
    d = np.zeros(n)
    d[idx] = 1.0

    def mv(x):
        return d * np.ravel(x)

    op = LinearOperator((n, n), matvec=mv, rmatvec=mv, dtype=float)
    op.diagonal = d
    return op


def as_operator(A) -> LinearOperator:
    """Wrap a dense or sparse matrix (or pass through an operator)."""
    if isinstance(A, LinearOperator):
        return A
    if sp.issparse(A):
        return aslinearoperator(A.astype(float))
    return aslinearoperator(as_matrix(A))


def to_dense(op) -> np.ndarray:
    """Materialize an operator column by column."""
    if isinstance(op, np.ndarray):
        return op
    if hasattr(op, "diagonal") and isinstance(op.diagonal, np.ndarray):
        return np.diag(op.diagonal)
    m, n = op.shape
    if n > DENSE_GUARD:
        raise DimensionError("operator too large to materialize")
    return np.column_stack([op.matvec(e) for e in np.eye(n)])


def adjoint_mismatch(op, probes: int = 20, seed: int = 0) -> float:
    """Largest relative violation of ``<Ax, y> = <x, A^T y>`` over random probes."""
    op = as_operator(op)
    rng = np.random.default_rng(seed)
    m, n = op.shape
    worst = 0.0
    for _ in range(probes):
        x = rng.standard_normal(n)
        y = rng.standard_normal(m)
        Ax = op.matvec(x)
        Aty = op.rmatvec(y)
        lhs = float(np.dot(Ax, y))
        rhs = float(np.dot(x, Aty))
        scale = np.linalg.norm(Ax) * np.linalg.norm(y) + np.linalg.norm(x) * np.linalg.norm(Aty)
        worst = max(worst, abs(lhs - rhs) / max(scale, 1e-300))
    return worst


def noise_rng(seed) -> np.random.Generator:
    """Counter-based Philox generator used for every random draw in the package."""
    return np.random.Generator(np.random.Philox(seed))


def add_noise(y, model: str = "gaussian", *, mean: float = 0.0, std: float = 0.0,
              scale: float = 1.0, seed=0) -> np.ndarray:
    """Gaussian (additive) or Poisson (signal-dependent) noise, deterministic per seed.

    Poisson noise draws ``Poisson(scale * max(y, 0)) / scale``. Works on
    arrays of any shape.
    """
    y = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(y)):
        raise DomainError("signal has non-finite entries")
    rng = noise_rng(seed)
    if model == "gaussian":
        if std < 0:
            raise DomainError("noise std must be non-negative")
        if std == 0 and mean == 0:
            return y.copy()
        return y + rng.normal(mean, std, size=y.shape) if std > 0 else y + mean
    if model == "poisson":
        if scale <= 0:
            raise DomainError("Poisson scale must be positive")
        return rng.poisson(scale * np.maximum(y, 0.0)).astype(float) / scale
    raise DomainError(f"unknown noise model {model!r}")
