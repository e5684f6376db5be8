"""Seeded desk-scale instances shared by the CLI, the tests and the acceptance suite."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .operators import Psf, add_noise, conv_matrix, mask_operator, noise_rng, psf_build, vectorize

DESK_SIZE = 32
DESK_PSF = ("gaussian-iso", 7, 1.5)
DESK_NOISE_STD = 5e-4
DEMO_LAMBDAS = (8e-5, 0.0025, 0.1)
LCURVE_RANGE = (1e-6, 0.8)


def phantom(n: int = DESK_SIZE) -> np.ndarray:
    """Piecewise-smooth test image in ``[0, 1]``: rectangle, disk, bar and a Gaussian bump."""
    r, c = np.mgrid[0:n, 0:n] / (n - 1)
    X = np.full((n, n), 0.1)
    X[(r > 0.15) & (r < 0.45) & (c > 0.1) & (c < 0.5)] = 0.8
    X[(r - 0.68) ** 2 + (c - 0.65) ** 2 < 0.04] = 0.55
    X += 0.3 * np.exp(-((r - 0.75) ** 2 + (c - 0.2) ** 2) / 0.01)
    X[(r > 0.1) & (r < 0.9) & (np.abs(c - 0.85) < 0.03)] = 1.0
    return np.clip(X, 0.0, 1.0)


@dataclass
class DeblurInstance:
    X_true: np.ndarray
    psf: Psf
    bc: str
    A: np.ndarray
    y_clean: np.ndarray
    y: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.X_true.shape

    @property
    def x_true(self) -> np.ndarray:
        return vectorize(self.X_true)

    @property
    def delta_norm(self) -> float:
        return float(np.linalg.norm(self.y - self.y_clean))

    def mse(self, x) -> float:
        return float(np.mean((np.ravel(x) - self.x_true) ** 2))


def desk_deblur(n: int = DESK_SIZE, psf: Psf | None = None, bc: str = "zero",
                noise_std: float = DESK_NOISE_STD, seed=0, X_true=None) -> DeblurInstance:
    """Blurred, noisy phantom with a dense convolution matrix (inverse-crime setting)."""
    X = phantom(n) if X_true is None else np.asarray(X_true, dtype=float)
    psf = psf or psf_build(DESK_PSF[0], DESK_PSF[1], DESK_PSF[2])
    A = conv_matrix(psf, X.shape[0], X.shape[1], bc)
    yc = A @ vectorize(X)
    y = add_noise(yc, std=noise_std, seed=seed)
    return DeblurInstance(X, psf, bc, A, yc, y)


@dataclass
class MissingDataInstance:
    t: np.ndarray
    x_true: np.ndarray
    keep: np.ndarray
    gaps: list
    A: np.ndarray
    y: np.ndarray


def missing_data(n: int = 400, noise_std: float = 0.0, seed=0) -> MissingDataInstance:
    """``sin(t)`` on ``[0, 8 pi]`` observed through a 0/1 mask with two gaps.

    Noise is added after the gaps are zeroed, so gap entries of ``y`` carry noise too.
    """
    t = np.linspace(0.0, 8 * np.pi, n)
    x = np.sin(t)
    gaps = [(int(0.2 * n), int(0.3 * n)), (int(0.6 * n), int(0.72 * n))]
    drop = np.zeros(n, dtype=bool)
    for a, b in gaps:
        drop[a:b] = True
    keep = np.flatnonzero(~drop)
    A = mask_operator(keep, n).diagonal
    y = A * x
    if noise_std > 0:
        y = add_noise(y, std=noise_std, seed=seed)
    return MissingDataInstance(t, x, keep, gaps, np.diag(A), y)


@dataclass
class InterpInstance:
    t: np.ndarray
    y: np.ndarray
    y_clean: np.ndarray
    t_poly: np.ndarray
    t_trig: np.ndarray


def interp_signal(n: int = 40, noise_std: float = 0.1, seed=0) -> InterpInstance:
    """``cos t + cos 3t`` plus noise on ``pi < t < 3 pi``.

    The polynomial basis is evaluated on the nodes rescaled to ``[-1.7, 1.7]``,
    the trigonometric basis on the nodes shifted to ``[-pi, pi]``.
    """
    t = np.linspace(np.pi, 3 * np.pi, n + 2)[1:-1]
    clean = np.cos(t) + np.cos(3 * t)
    y = add_noise(clean, std=noise_std, seed=seed)
    t_poly = -1.7 + 3.4 * (t - np.pi) / (2 * np.pi)
    t_trig = t - 2 * np.pi
    return InterpInstance(t, y, clean, t_poly, t_trig)


@dataclass
class QuinticInstance:
    t: np.ndarray
    y: np.ndarray
    y_clean: np.ndarray


def quintic_signal(n: int = 30, noise_std: float = 1.0, seed=0) -> QuinticInstance:
    """``-2 + 2 t - t^5`` plus ``N(0, 1)`` noise on ``-1.6 < t < 1.6``."""
    t = np.linspace(-1.6, 1.6, n + 2)[1:-1]
    clean = -2.0 + 2.0 * t - t**5
    return QuinticInstance(t, add_noise(clean, std=noise_std, seed=seed), clean)


def step_signal(n: int = 100, height: float = 1.0, noise_std: float = 0.05, seed=0):
    """Unit step in the middle of ``n`` samples; returns ``(clean, noisy)``."""
    clean = np.where(np.arange(n) < n // 2, 0.0, height)
    return clean, add_noise(clean, std=noise_std, seed=seed)


def dct_sparse_image(n: int = 100, k: int = 60, band: int = 20, seed=0) -> tuple[np.ndarray, np.ndarray]:
    """Coefficients (column-stacked) with ``k`` non-zeros in the low ``band x band`` DCT block.

    Returns ``(s, support)``; pair with :func:`illposed.sparse.dct2_dictionary`.
    """
    rng = noise_rng(seed)
    S = np.zeros((n, n))
    idx = rng.choice(band * band, size=k, replace=False)
    rows, cols = np.unravel_index(idx, (band, band))
    S[rows, cols] = rng.choice([-1.0, 1.0], size=k) * rng.uniform(0.5, 1.5, size=k)
    s = S.ravel(order="F")
    return s, np.flatnonzero(s)


def sparse_vector(n: int, k: int, seed=0) -> np.ndarray:
    rng = noise_rng(seed)
    s = np.zeros(n)
    idx = rng.choice(n, size=k, replace=False)
    s[idx] = rng.choice([-1.0, 1.0], size=k) * rng.uniform(1.0, 2.0, size=k)
    return s
