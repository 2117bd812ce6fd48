"""Stationary covariance kernels and kernel-matrix assembly.

Supported families are the Gaussian kernel and the Matern class with
half-integer smoothness 1/2, 3/2, 5/2, either isotropic or as a product
over dimensions.  A kernel value is amplitude * k0(scaled distance) with
k0(0) = 1, so k(x, x) = amplitude everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from numpy.typing import NDArray

from .errors import DimensionMismatch

__all__ = ["KernelSpec", "gaussian_kernel", "matern_kernel", "kernel_eval", "kernel_matrix"]

_MATERN_RHOS = (0.5, 1.5, 2.5)


@dataclass(frozen=True)
class KernelSpec:
    """Covariance kernel: family, length-scale(s), amplitude, Matern smoothness.

    ``lengthscale`` is either a single positive float shared by all dimensions
    or a tuple with one entry per dimension.  ``structure`` selects between the
    isotropic form (Euclidean distance) and the product-over-dimensions form;
    for the Gaussian family the two coincide when the length-scale is shared.
    """

    family: str
    lengthscale: float | tuple[float, ...]
    amplitude: float = 1.0
    rho: float | None = None
    structure: str = "product"

    def __post_init__(self):
        if self.family not in ("gaussian", "matern"):
            raise ValueError(f"unknown kernel family {self.family!r}")
        if self.structure not in ("product", "isotropic"):
            raise ValueError(f"unknown kernel structure {self.structure!r}")
        ells = np.atleast_1d(np.asarray(self.lengthscale, dtype=float))
        if not np.all(ells > 0):
            raise ValueError("lengthscale must be positive")
        if not self.amplitude > 0:
            raise ValueError("amplitude must be positive")
        if self.family == "matern" and self.rho not in _MATERN_RHOS:
            raise ValueError(f"matern smoothness must be one of {_MATERN_RHOS}, got {self.rho}")

    def lengthscales(self, d: int) -> NDArray:
        """Per-dimension length-scales broadcast to dimension d."""
        ells = np.atleast_1d(np.asarray(self.lengthscale, dtype=float))
        if ells.size == 1:
            return np.full(d, ells[0])
        if ells.size != d:
            raise DimensionMismatch(
                f"kernel has {ells.size} per-dimension length-scales but points have dimension {d}"
            )
        return ells

    def with_lengthscale(self, ell: float) -> "KernelSpec":
        return replace(self, lengthscale=float(ell))

    def with_amplitude(self, amplitude: float) -> "KernelSpec":
        return replace(self, amplitude=float(amplitude))


def gaussian_kernel(lengthscale: float | tuple[float, ...], amplitude: float = 1.0) -> KernelSpec:
    """Gaussian kernel amplitude * exp(-||x - x'||^2 / (2 ell^2))."""
    return KernelSpec(family="gaussian", lengthscale=lengthscale, amplitude=amplitude)


def matern_kernel(
    rho: float,
    lengthscale: float | tuple[float, ...],
    amplitude: float = 1.0,
    structure: str = "product",
) -> KernelSpec:
    """Matern kernel with half-integer smoothness rho in {1/2, 3/2, 5/2}."""
    return KernelSpec(
        family="matern", lengthscale=lengthscale, amplitude=amplitude, rho=rho, structure=structure
    )


def _matern_base(z: NDArray, rho: float) -> NDArray:
    """Unit-amplitude Matern correlation as a function of |x - x'| / ell >= 0."""
    if rho == 0.5:
        return np.exp(-z)
    if rho == 1.5:
        s = np.sqrt(3.0) * z
        return (1.0 + s) * np.exp(-s)
    s = np.sqrt(5.0) * z
    return (1.0 + s + s * s / 3.0) * np.exp(-s)


def _as_points(X) -> NDArray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 0:
        X = X.reshape(1, 1)
    elif X.ndim == 1:
        X = X.reshape(-1, 1)
    elif X.ndim != 2:
        raise DimensionMismatch(f"expected points of shape (n, d), got {X.shape}")
    return X


def kernel_matrix(spec: KernelSpec, X, Y) -> NDArray:
    """Kernel matrix [k(x_i, y_j)] for node lists X (n, d) and Y (m, d).

    One-dimensional inputs are interpreted as n points in R^1.
    """
    X = _as_points(X)
    Y = _as_points(Y)
    if X.shape[1] != Y.shape[1]:
        raise DimensionMismatch(f"node dimensions differ: {X.shape[1]} vs {Y.shape[1]}")
    d = X.shape[1]
    ells = spec.lengthscales(d)
    Z = np.abs(X[:, None, :] - Y[None, :, :]) / ells
    if spec.family == "gaussian":
        K = np.exp(-0.5 * (Z * Z).sum(axis=-1))
    elif spec.structure == "isotropic":
        K = _matern_base(np.sqrt((Z * Z).sum(axis=-1)), spec.rho)
    else:
        K = _matern_base(Z, spec.rho).prod(axis=-1)
    return spec.amplitude * K


def kernel_eval(spec: KernelSpec, x, x_prime) -> float:
    """Kernel value k(x, x') for two points of matching dimension."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    x_prime = np.atleast_1d(np.asarray(x_prime, dtype=float))
    if x.shape != x_prime.shape:
        raise DimensionMismatch(f"point dimensions differ: {x.shape} vs {x_prime.shape}")
    return float(kernel_matrix(spec, x.reshape(1, -1), x_prime.reshape(1, -1))[0, 0])
