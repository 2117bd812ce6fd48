"""Kernel hyperparameter handling.

The amplitude carries an improper prior and is marginalised analytically,
which turns the Gaussian posterior over the integral into a Student-t with
n degrees of freedom and profiles the amplitude out of the log-marginal
likelihood.  The length-scale is chosen by empirical Bayes: a coarse
log-spaced grid scan followed by golden-section refinement, which is
derivative-free and robust to the multimodal likelihoods that show up at
small n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .cubature import CubatureResult
from .errors import FactorizationFailed
from .gp import Dataset
from .kernels import KernelSpec, kernel_matrix
from .linalg import jittered_factorize

__all__ = ["StudentTPosterior", "EBConfig", "EBResult", "log_marginal", "eb_lengthscale", "studentize"]


@dataclass(frozen=True)
class StudentTPosterior:
    """Marginal-amplitude posterior over the integral: location, squared scale, dof."""

    location: float
    scale2: float
    dof: int

    @property
    def scale(self) -> float:
        return float(np.sqrt(self.scale2))

    def interval(self, level: float = 0.95) -> tuple[float, float]:
        """Central credible interval at the given level."""
        half = stats.t.ppf(0.5 + level / 2.0, df=self.dof) * self.scale
        return self.location - half, self.location + half


@dataclass(frozen=True)
class EBConfig:
    """Log-grid bounds and refinement tolerance for the length-scale search."""

    ell_min: float = 0.05
    ell_max: float = 20.0
    grid_size: int = 60
    rel_tol: float = 1e-4

    def __post_init__(self):
        if not (0 < self.ell_min < self.ell_max):
            raise ValueError("need 0 < ell_min < ell_max")


@dataclass(frozen=True)
class EBResult:
    ell: float
    log_marginal: float
    lambda_hat: float
    non_identifiable: bool = False


def log_marginal(kernel: KernelSpec, data: Dataset, profile_amplitude: bool = True) -> float:
    """GP log-marginal likelihood of the data under the kernel.

    With ``profile_amplitude`` the amplitude is replaced by its analytic
    maximiser lambda_hat = f^T K0^{-1} f / n, where K0 is the unit-amplitude
    kernel matrix; otherwise the kernel's own amplitude is used.
    """
    n = data.n
    if profile_amplitude:
        K0 = jittered_factorize(kernel_matrix(kernel.with_amplitude(1.0), data.X, data.X))
        quad = float(data.f @ K0.solve(data.f))
        lam = max(quad / n, np.finfo(float).tiny)
        return -0.5 * n - 0.5 * (K0.log_det + n * math.log(lam)) - 0.5 * n * math.log(2 * math.pi)
    K = jittered_factorize(kernel_matrix(kernel, data.X, data.X))
    quad = float(data.f @ K.solve(data.f))
    return -0.5 * quad - 0.5 * K.log_det - 0.5 * n * math.log(2 * math.pi)


def _profiled_amplitude(kernel: KernelSpec, data: Dataset) -> float:
    K0 = jittered_factorize(kernel_matrix(kernel.with_amplitude(1.0), data.X, data.X))
    return float(data.f @ K0.solve(data.f)) / data.n


def eb_lengthscale(kernel: KernelSpec, data: Dataset, config: EBConfig | None = None) -> EBResult:
    """Empirical-Bayes length-scale: log-grid scan plus golden-section refinement.

    Grid candidates whose factorization fails are skipped; the call fails only
    when every candidate fails.  Deterministic for fixed inputs.  A flat
    profile (for example a single observation) is flagged non-identifiable.
    """
    config = config or EBConfig()
    ells = np.geomspace(config.ell_min, config.ell_max, config.grid_size)

    def objective(ell: float) -> float:
        try:
            return log_marginal(kernel.with_lengthscale(ell), data)
        except FactorizationFailed:
            return -np.inf

    values = np.array([objective(e) for e in ells])
    if not np.any(np.isfinite(values)):
        raise FactorizationFailed("every length-scale candidate failed to factorize")
    best = int(np.argmax(values))
    finite = values[np.isfinite(values)]
    non_identifiable = data.n == 1 or float(finite.max() - finite.min()) <= 1e-9 * max(
        1.0, abs(float(finite.max()))
    )

    lo = math.log(ells[max(best - 1, 0)])
    hi = math.log(ells[min(best + 1, config.grid_size - 1)])
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = objective(math.exp(c)), objective(math.exp(d))
    while (b - a) > config.rel_tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = objective(math.exp(c))
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = objective(math.exp(d))
    ell_hat = math.exp(0.5 * (a + b))
    value = objective(ell_hat)
    if not np.isfinite(value) or value < values[best]:
        ell_hat, value = float(ells[best]), float(values[best])
    lam = _profiled_amplitude(kernel.with_lengthscale(ell_hat), data)
    return EBResult(
        ell=float(ell_hat),
        log_marginal=float(value),
        lambda_hat=float(lam),
        non_identifiable=bool(non_identifiable),
    )


def studentize(result: CubatureResult, data: Dataset, kernel: KernelSpec) -> StudentTPosterior:
    """Marginalise the amplitude of a unit-amplitude cubature result.

    The posterior over the integral becomes Student-t with the same location,
    squared scale (f^T K_X^{-1} f / n) * variance, and n degrees of freedom.
    """
    K = jittered_factorize(kernel_matrix(kernel, data.X, data.X))
    quad = float(data.f @ K.solve(data.f))
    return StudentTPosterior(
        location=result.mean,
        scale2=(quad / data.n) * result.variance,
        dof=data.n,
    )
