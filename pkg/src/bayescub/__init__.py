"""Probabilistic numerical integration with polynomial exactness guarantees."""

__version__ = "0.1.0"

from .cubature import CubatureResult, bc, bsc, bsc_square, endow_rule, normalized_bc, wce
from .gp import Dataset, PosteriorGP, condition, finite_prior, flat_prior
from .hyper import EBConfig, StudentTPosterior, eb_lengthscale, log_marginal, studentize
from .kernels import KernelSpec, gaussian_kernel, kernel_eval, kernel_matrix, matern_kernel
from .measures import (
    DiagonalGaussian,
    StandardGaussian,
    UniformBox,
    initial_error,
    kernel_mean,
    poly_moments,
)
from .polyspace import (
    FunctionSpace,
    custom_space,
    empty_space,
    is_unisolvent,
    total_degree_space,
    vandermonde,
)

__all__ = [
    "__version__",
    "CubatureResult",
    "bc",
    "bsc",
    "bsc_square",
    "endow_rule",
    "normalized_bc",
    "wce",
    "Dataset",
    "PosteriorGP",
    "condition",
    "finite_prior",
    "flat_prior",
    "EBConfig",
    "StudentTPosterior",
    "eb_lengthscale",
    "log_marginal",
    "studentize",
    "KernelSpec",
    "gaussian_kernel",
    "kernel_eval",
    "kernel_matrix",
    "matern_kernel",
    "DiagonalGaussian",
    "StandardGaussian",
    "UniformBox",
    "initial_error",
    "kernel_mean",
    "poly_moments",
    "FunctionSpace",
    "custom_space",
    "empty_space",
    "is_unisolvent",
    "total_degree_space",
    "vandermonde",
]
