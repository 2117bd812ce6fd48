"""Integral estimators and their uncertainty quantification.

Every estimator returns a :class:`CubatureResult` with the posterior mean,
posterior variance, node weights, and diagnostics.  The flat-prior estimator
with a parametric space ("bsc") integrates every element of the space exactly;
the centred estimator ("bc") is worst-case optimal in the kernel's RKHS; the
normalised variant pins the weight sum to one; the square (Q = n) regime has
kernel-independent weights and a variance equal to the squared worst-case
error, which is what lets an arbitrary external rule be endowed with a
posterior.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .errors import FactorizationFailed, NotUnisolvent, ZeroWeight
from .gp import Dataset
from .kernels import KernelSpec, kernel_matrix
from .linalg import JitterPolicy, jittered_factorize, numeric_rank, refined_solve, solve_saddle
from .measures import Measure, kernel_mean_set
from .polyspace import FunctionSpace, vandermonde

__all__ = ["Diagnostics", "CubatureResult", "bc", "bsc", "normalized_bc", "bsc_square", "wce", "endow_rule"]

VARIANCE_CLAMP_TOL = 1e-10  # relative to the kernel amplitude


@dataclass(frozen=True)
class Diagnostics:
    jitter: float
    vandermonde_rank: int | None
    wall_time: float
    variance_clamped: bool = False


@dataclass(frozen=True)
class CubatureResult:
    """Posterior over the integral plus the weights that produced it."""

    mean: float
    variance: float
    weights: NDArray
    poly_weights: NDArray
    method: str
    diagnostics: Diagnostics

    @property
    def stddev(self) -> float:
        return float(np.sqrt(self.variance))


def _finalize_variance(var: float, amplitude: float) -> tuple[float, bool]:
    if var < -VARIANCE_CLAMP_TOL * amplitude:
        raise FactorizationFailed(
            f"posterior variance {var:.3e} is more negative than the roundoff "
            f"tolerance {-VARIANCE_CLAMP_TOL * amplitude:.3e}; conditioning is broken"
        )
    if var < 0.0:
        return 0.0, True
    return float(var), False


def bc(
    kernel: KernelSpec,
    measure: Measure,
    data: Dataset,
    jitter: JitterPolicy | None = None,
) -> CubatureResult:
    """Centred-prior estimator: weights K_X^{-1} k_{nu,X}, worst-case optimal in H(k)."""
    t0 = time.perf_counter()
    K = jittered_factorize(kernel_matrix(kernel, data.X, data.X), jitter)
    kms = kernel_mean_set(kernel, measure, data.X)
    w = refined_solve(K, kms.k_nu_X)
    var, clamped = _finalize_variance(kms.k_nu_nu - float(kms.k_nu_X @ w), kernel.amplitude)
    return CubatureResult(
        mean=float(w @ data.f),
        variance=var,
        weights=w,
        poly_weights=np.zeros(0),
        method="bc",
        diagnostics=Diagnostics(K.jitter_used, None, time.perf_counter() - t0, clamped),
    )


def bsc(
    kernel: KernelSpec,
    measure: Measure,
    space: FunctionSpace,
    data: Dataset,
    eta=None,
    jitter: JitterPolicy | None = None,
) -> CubatureResult:
    """Flat-prior estimator with exactness on the parametric space.

    Weights solve [[K, P], [P^T, 0]] [w_k; w_pi] = [k_{nu,X}; p_nu]; the
    variance adds the parametric correction (k_{nu,X} K^{-1} P - p_nu) w_pi
    to the centred variance.  With a nonzero coefficient mean eta the
    posterior mean gains the -w_pi^T eta term.
    """
    t0 = time.perf_counter()
    V = vandermonde(space, data.X)
    rank = numeric_rank(V.matrix) if space.Q > 0 else 0
    if data.n < space.Q or rank < space.Q:
        raise NotUnisolvent(
            f"nodes are not unisolvent for the space: n={data.n}, Q={space.Q}, rank={rank}"
        )
    K = jittered_factorize(kernel_matrix(kernel, data.X, data.X), jitter)
    kms = kernel_mean_set(kernel, measure, data.X, space)
    sol = solve_saddle(K, V.matrix, kms.k_nu_X, kms.p_nu)
    w_bc = refined_solve(K, kms.k_nu_X)
    var_bc = kms.k_nu_nu - float(kms.k_nu_X @ w_bc)
    correction = float((w_bc @ V.matrix - kms.p_nu) @ sol.bottom)
    var, clamped = _finalize_variance(var_bc + correction, kernel.amplitude)
    mean = float(sol.top @ data.f)
    if eta is not None:
        mean -= float(sol.bottom @ np.asarray(eta, dtype=float))
    return CubatureResult(
        mean=mean,
        variance=var,
        weights=sol.top,
        poly_weights=sol.bottom,
        method="bsc",
        diagnostics=Diagnostics(K.jitter_used, rank, time.perf_counter() - t0, clamped),
    )


def normalized_bc(
    kernel: KernelSpec,
    measure: Measure,
    data: Dataset,
    jitter: JitterPolicy | None = None,
) -> CubatureResult:
    """Centred estimator projected so the weights sum to one.

    Uses the closed-form weight expression; the result coincides with the
    flat-prior estimator over the constant space.
    """
    t0 = time.perf_counter()
    K = jittered_factorize(kernel_matrix(kernel, data.X, data.X), jitter)
    kms = kernel_mean_set(kernel, measure, data.X)
    ones = np.ones(data.n)
    Kinv_k = refined_solve(K, kms.k_nu_X)
    Kinv_1 = refined_solve(K, ones)
    denom = float(ones @ Kinv_1)
    w = Kinv_k - Kinv_1 * (float(ones @ Kinv_k) / denom) + Kinv_1 / denom
    Kmat = kernel_matrix(kernel, data.X, data.X)
    var_raw = kms.k_nu_nu - 2.0 * float(kms.k_nu_X @ w) + float(w @ Kmat @ w)
    var, clamped = _finalize_variance(var_raw, kernel.amplitude)
    return CubatureResult(
        mean=float(w @ data.f),
        variance=var,
        weights=w,
        poly_weights=np.zeros(1),
        method="nbc",
        diagnostics=Diagnostics(K.jitter_used, 1, time.perf_counter() - t0, clamped),
    )


def bsc_square(
    kernel: KernelSpec,
    measure: Measure,
    space: FunctionSpace,
    data: Dataset,
) -> CubatureResult:
    """Q = n regime: weights p_nu P_X^{-1} independent of the kernel.

    The variance is the squared worst-case error of the resulting rule, so the
    kernel enters only through the uncertainty, not the point estimate.
    """
    t0 = time.perf_counter()
    if space.Q != data.n:
        raise NotUnisolvent(f"square regime requires Q = n, got Q={space.Q}, n={data.n}")
    V = vandermonde(space, data.X)
    rank = numeric_rank(V.matrix)
    if rank < space.Q:
        raise NotUnisolvent(f"nodes are not unisolvent: rank {rank} < Q = {space.Q}")
    kms = kernel_mean_set(kernel, measure, data.X, space)
    try:
        w = np.linalg.solve(V.matrix.T, kms.p_nu)
    except np.linalg.LinAlgError as exc:
        raise NotUnisolvent("Vandermonde matrix is numerically singular") from exc
    Kmat = kernel_matrix(kernel, data.X, data.X)
    var_raw = kms.k_nu_nu - 2.0 * float(kms.k_nu_X @ w) + float(w @ Kmat @ w)
    var, clamped = _finalize_variance(var_raw, kernel.amplitude)
    return CubatureResult(
        mean=float(w @ data.f),
        variance=var,
        weights=w,
        poly_weights=np.zeros(0),
        method="square",
        diagnostics=Diagnostics(0.0, rank, time.perf_counter() - t0, clamped),
    )


def wce(kernel: KernelSpec, measure: Measure, X, w) -> float:
    """Worst-case integration error of the rule (X, w) in the kernel's RKHS.

    Explicit form sqrt(k_{nu,nu} - 2 k_{nu,X} w + w^T K_X w), clamped at zero
    (with a warning) when roundoff drives the square slightly negative.
    """
    X = np.asarray(X, dtype=float)
    X = X.reshape(-1, 1) if X.ndim == 1 else X
    w = np.asarray(w, dtype=float).reshape(-1)
    if w.shape[0] != X.shape[0]:
        raise ValueError(f"got {X.shape[0]} nodes but {w.shape[0]} weights")
    kms = kernel_mean_set(kernel, measure, X)
    Kmat = kernel_matrix(kernel, X, X)
    e2 = kms.k_nu_nu - 2.0 * float(kms.k_nu_X @ w) + float(w @ Kmat @ w)
    if e2 < 0.0:
        warnings.warn(
            f"squared worst-case error {e2:.3e} clamped to zero (roundoff)",
            RuntimeWarning,
            stacklevel=2,
        )
        e2 = 0.0
    return float(np.sqrt(e2))


def endow_rule(
    X,
    w,
    kernel: KernelSpec,
    measure: Measure,
    data: Dataset,
) -> CubatureResult:
    """Endow an externally supplied cubature rule with a posterior.

    For any rule with nonzero weights there is an n-dimensional function space
    reproducing exactly those weights, and every such space yields the same
    output: mean w^T f_X and variance equal to the squared worst-case error.
    That output is returned directly, without materializing a basis.
    """
    t0 = time.perf_counter()
    X = np.asarray(X, dtype=float)
    X = X.reshape(-1, 1) if X.ndim == 1 else X
    w = np.asarray(w, dtype=float).reshape(-1)
    if w.shape[0] != X.shape[0]:
        raise ValueError(f"got {X.shape[0]} nodes but {w.shape[0]} weights")
    if np.any(w == 0.0):
        raise ZeroWeight("every weight must be nonzero to admit a reproducing space")
    if not np.array_equal(X, data.X):
        raise ValueError("rule nodes must match the dataset nodes")
    sigma = wce(kernel, measure, X, w)
    return CubatureResult(
        mean=float(w @ data.f),
        variance=sigma**2,
        weights=w,
        poly_weights=np.zeros(0),
        method="endow",
        diagnostics=Diagnostics(0.0, None, time.perf_counter() - t0, False),
    )
