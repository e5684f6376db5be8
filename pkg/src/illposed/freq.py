"""Deblurring in the Fourier domain for periodic convolution models.

FFT convention: unnormalized forward transform, ``1/n`` on the inverse
(``numpy.fft`` defaults), so ``||F x|| = sqrt(n) ||x||``. The constant added
to ``|F H|^2`` is therefore on the scale of the unnormalized spectrum.
"""

from __future__ import annotations

import numpy as np

from .core import DimensionError, DomainError, as_matrix
from .operators import Psf, _kernel_of

IMAG_TOL = 1e-8


def psf_spectrum(H: Psf | np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    """FFT of the kernel zero-padded to ``shape`` with its center moved to index (0, 0)."""
    k = _kernel_of(H)
    h, w = shape
    if k.shape[0] > h or k.shape[1] > w:
        raise DimensionError("kernel larger than image")
    P = np.zeros(shape)
    P[: k.shape[0], : k.shape[1]] = k
    P = np.roll(P, (-(k.shape[0] // 2), -(k.shape[1] // 2)), axis=(0, 1))
    return np.fft.fft2(P)


def _filter(Y, H, const: float) -> np.ndarray:
    Y = as_matrix(Y, "image")
    FH = psf_spectrum(H, Y.shape)
    denom = np.abs(FH) ** 2 + const
    if np.any(denom == 0):
        raise DomainError("spectrum vanishes where no regularization is added")
    X = np.fft.ifft2(np.conj(FH) * np.fft.fft2(Y) / denom)
    scale = max(np.abs(X.real).max(), 1e-300)
    if np.abs(X.imag).max() > IMAG_TOL * max(scale, 1.0):
        raise DomainError("inverse FFT left a non-negligible imaginary part")
    return X.real


def fft_tikhonov(Y, H, lam: float) -> np.ndarray:
    """``F^{-1}[ conj(F H) F Y / (|F H|^2 + lam^2) ]``."""
    if lam <= 0:
        raise DomainError("lambda must be positive")
    return _filter(Y, H, lam**2)


def wiener_nsr(Y, H, nsr: float) -> np.ndarray:
    """Wiener deconvolution with a flat noise-to-signal ratio ``nsr``."""
    if nsr < 0:
        raise DomainError("NSR must be non-negative")
    return _filter(Y, H, float(nsr))


def high_frequency_energy(X, quantile: float = 0.75) -> float:
    """Spectral energy at radial frequencies above the given quantile of the radius range."""
    X = as_matrix(X, "image")
    F = np.fft.fft2(X)
    fy = np.fft.fftfreq(X.shape[0])[:, None]
    fx = np.fft.fftfreq(X.shape[1])[None, :]
    rad = np.hypot(fy, fx)
    return float(np.sum(np.abs(F[rad >= quantile * rad.max()]) ** 2))
