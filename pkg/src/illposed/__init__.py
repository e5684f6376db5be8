"""Regularization methods for discrete linear ill-posed inverse problems."""

from .core import (
    DimensionError,
    DomainError,
    IllPosedError,
    SingularityError,
    SvdFactors,
    condition_number,
    lp_norm,
    pinv_left,
    pinv_right,
    svd,
)
from .operators import (
    BoundaryCondition,
    Psf,
    add_noise,
    conv2d,
    conv_matrix,
    conv_operator,
    devectorize,
    downsample_matrix,
    mask_operator,
    psf_build,
    vectorize,
)
from .regmat import RegularizerSpec, build_L, laplacian2d_operator

__version__ = "0.1.0"

__all__ = [
    "DimensionError", "DomainError", "IllPosedError", "SingularityError", "SvdFactors",
    "condition_number", "lp_norm", "pinv_left", "pinv_right", "svd",
    "BoundaryCondition", "Psf", "add_noise", "conv2d", "conv_matrix", "conv_operator", "devectorize",
    "downsample_matrix", "mask_operator", "psf_build", "vectorize",
    "RegularizerSpec", "build_L", "laplacian2d_operator",
]
