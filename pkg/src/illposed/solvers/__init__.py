from .base import FIXED_BUDGET, SolveReport, StopRule, spectral_norm
from .denoise import Denoiser, identity_denoiser, median_denoiser, pnp_admm, red, red_gradient, red_objective
from .direct import (
    GaussianModel,
    map_gaussian,
    naive_solve,
    newton_step,
    quadratic_gradient,
    quadratic_objective,
    stacked_solve,
    tikhonov_classic,
    tikhonov_data_form,
    tikhonov_general,
    tikhonov_multi,
)
from .irls import IrlsConfig, irls, irls_objective
from .krylov import cgls, disappearing_tikhonov, landweber
from .maxent import maxent
from .proximal import admm, fista, gradient_2d, ista, l1_objective, soft_threshold, tv_value

__all__ = [
    "FIXED_BUDGET", "SolveReport", "StopRule", "spectral_norm",
    "Denoiser", "identity_denoiser", "median_denoiser", "pnp_admm", "red", "red_gradient", "red_objective",
    "GaussianModel", "map_gaussian", "naive_solve", "newton_step", "quadratic_gradient",
    "quadratic_objective", "stacked_solve", "tikhonov_classic", "tikhonov_data_form",
    "tikhonov_general", "tikhonov_multi",
    "IrlsConfig", "irls", "irls_objective",
    "cgls", "disappearing_tikhonov", "landweber",
    "maxent",
    "admm", "fista", "gradient_2d", "ista", "l1_objective", "soft_threshold", "tv_value",
]
