"""Benchmark integrands with exact oracles and the convergence-verification harness.

The toy integrand is a one-dimensional Gaussian expectation with a frozen
high-precision reference value.  The bond-price integrand arises from the
Euler discretisation of a mean-reverting Gaussian short-rate model; because
the discretised rates are affine in the driving normals, the discounted sum
is log-Gaussian and the exact price follows from the moment-generating
function, independently checkable by Monte Carlo.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np
from numpy.typing import NDArray
from scipy.spatial import cKDTree
from scipy.special import ndtri

from .cubature import bc, bsc, bsc_square, normalized_bc
from .errors import DomainBoundary, GridTooLarge, NotUnisolvent
from .gp import Dataset
from .hyper import EBConfig, eb_lengthscale
from .kernels import KernelSpec
from .measures import Measure, sample
from .polyspace import total_degree_space

__all__ = [
    "toy_integrand",
    "toy_truth",
    "ZCBModel",
    "vasicek_paper_model",
    "zcb_integrand",
    "zcb_truth",
    "EquispacedGrid",
    "ScaledSymmetricGrid",
    "RandomUniformBox",
    "ExplicitPoints",
    "PointSetKind",
    "point_set",
    "fill_distance",
    "mc_estimate",
    "ConvergenceConfig",
    "ConvergenceRow",
    "SlopeFit",
    "ConvergenceReport",
    "convergence_run",
    "fit_loglog_slope",
    "rows_to_csv",
    "CSV_COLUMNS",
]

# Reference value of the toy Gaussian expectation, computed by adaptive
# quadrature over [-12, 12] (tail contribution below 1e-30) and confirmed
# with 40-digit arithmetic.
TOY_TRUTH = 2.0692641032552395


def toy_integrand(x):
    """One-dimensional test function exp(sin(2x) - x^2/5) + x^2; vectorizes."""
    x = np.asarray(x, dtype=float)
    out = np.exp(np.sin(2.0 * x) - x * x / 5.0) + x * x
    return float(out) if out.ndim == 0 else out


def toy_truth() -> float:
    """Exact Gaussian expectation of the toy integrand."""
    return TOY_TRUTH


@dataclass(frozen=True)
class ZCBModel:
    """Discretised mean-reverting short-rate model for a zero-coupon bond price.

    The rate path follows r_i = r_{i-1} + kappa (theta - r_{i-1}) dt
    + sigma_vol sqrt(dt) x_i with independent standard normals x_i, and the
    bond price is E[exp(-dt sum_{i=0}^{D-1} r_i)], a (D-1)-dimensional integral.
    """

    kappa: float
    theta: float
    sigma_vol: float
    r0: float
    T: float
    D: int

    def __post_init__(self):
        if min(self.kappa, self.theta, self.T) <= 0 or self.sigma_vol < 0 or self.D < 2:
            raise ValueError("need kappa, theta, T > 0, sigma_vol >= 0, D >= 2")

    @property
    def dt(self) -> float:
        return self.T / self.D

    @property
    def d(self) -> int:
        return self.D - 1


def vasicek_paper_model(D: int) -> ZCBModel:
    """Benchmark parameter set used throughout the bond-price experiments."""
    return ZCBModel(
        kappa=0.1817303, theta=0.0825398957, sigma_vol=0.0125901, r0=0.021673, T=5.0, D=D
    )


def _rate_path_sums(x: NDArray, model: ZCBModel) -> NDArray:
    """Sum of discretised rates along each path; x has shape (m, d)."""
    m = x.shape[0]
    r = np.full(m, model.r0)
    acc = np.full(m, model.r0)
    sqdt = np.sqrt(model.dt)
    for i in range(1, model.D):
        r = r + model.kappa * (model.theta - r) * model.dt + model.sigma_vol * sqdt * x[:, i - 1]
        acc = acc + r
    return acc


def zcb_integrand(u, model: ZCBModel) -> float:
    """Bond-price integrand on the open unit cube (0, 1)^d.

    Coordinates map through the standard normal quantile; values exactly on
    the cube boundary raise :class:`DomainBoundary`.
    """
    u = np.asarray(u, dtype=float).reshape(-1)
    if u.shape[0] != model.d:
        raise ValueError(f"point has dimension {u.shape[0]}, model has d = {model.d}")
    if np.any((u <= 0.0) | (u >= 1.0)):
        raise DomainBoundary("unit-cube coordinates must lie strictly inside (0, 1)")
    x = ndtri(u).reshape(1, -1)
    return float(np.exp(-model.dt * _rate_path_sums(x, model)[0]))


def zcb_truth(model: ZCBModel) -> float:
    """Exact bond price via the Gaussian moment-generating function.

    The discretised rates are affine in the driving normals, r = a + B x with
    lower-triangular B, so -dt * sum(r) is Gaussian with explicit mean and
    variance and the expectation is exp(mean + variance / 2).
    """
    dt = model.dt
    a = np.empty(model.D)
    a[0] = model.r0
    for i in range(1, model.D):
        a[i] = a[i - 1] + model.kappa * (model.theta - a[i - 1]) * dt
    mean = -dt * float(a.sum())
    g = 1.0 - model.kappa * dt
    # coefficient of x_j in -dt*sum_i r_i: r_i carries g^(i-j) sigma sqrt(dt) for i >= j
    powers = np.array([np.sum(g ** np.arange(0, model.D - j)) for j in range(1, model.D)])
    coef = -dt * model.sigma_vol * np.sqrt(dt) * powers
    s2 = float(coef @ coef)
    return float(np.exp(mean + 0.5 * s2))


# ---------------------------------------------------------------------------
# point sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EquispacedGrid:
    lo: float = 0.0
    hi: float = 1.0


@dataclass(frozen=True)
class ScaledSymmetricGrid:
    """Equispaced nodes on [-sqrt(n), sqrt(n)] per dimension."""


@dataclass(frozen=True)
class RandomUniformBox:
    lo: float = 0.0
    hi: float = 1.0
    seed: int = 0


@dataclass(frozen=True)
class ExplicitPoints:
    points: tuple


PointSetKind = Union[EquispacedGrid, ScaledSymmetricGrid, RandomUniformBox, ExplicitPoints]


def _tensor_thinned(lo: float, hi: float, n: int, d: int) -> NDArray:
    """Equispaced tensor grid thinned deterministically to exactly n points."""
    if d == 1:
        if n == 1:
            return np.array([[0.5 * (lo + hi)]])
        return np.linspace(lo, hi, n).reshape(-1, 1)
    m = int(np.ceil(n ** (1.0 / d)))
    while m**d < n:
        m += 1
    axes = [np.linspace(lo, hi, m) for _ in range(d)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    idx = np.round(np.linspace(0, m**d - 1, n)).astype(int)
    return grid[idx]


def point_set(kind: PointSetKind, n: int, d: int) -> NDArray:
    """Generate exactly n distinct nodes in R^d of the requested kind."""
    if n < 1 or d < 1:
        raise ValueError("need n >= 1 and d >= 1")
    if isinstance(kind, EquispacedGrid):
        return _tensor_thinned(kind.lo, kind.hi, n, d)
    if isinstance(kind, ScaledSymmetricGrid):
        half = np.sqrt(n)
        return _tensor_thinned(-half, half, n, d)
    if isinstance(kind, RandomUniformBox):
        rng = np.random.default_rng(kind.seed)
        X = rng.uniform(kind.lo, kind.hi, (n, d))
        while np.unique(X, axis=0).shape[0] < n:  # astronomically unlikely
            X = rng.uniform(kind.lo, kind.hi, (n, d))
        return X
    if isinstance(kind, ExplicitPoints):
        X = np.asarray(kind.points, dtype=float)
        X = X.reshape(-1, 1) if X.ndim == 1 else X
        if X.shape != (n, d):
            raise ValueError(f"explicit points have shape {X.shape}, expected ({n}, {d})")
        return X
    raise TypeError(f"unknown point-set kind {type(kind).__name__}")


def fill_distance(X, box: tuple, resolution: int) -> float:
    """Largest distance from a point of the box to its nearest node.

    Approximated on a resolution^d evaluation grid; the estimate lower-bounds
    the true fill distance by at most one grid diagonal.
    """
    X = np.asarray(X, dtype=float)
    X = X.reshape(-1, 1) if X.ndim == 1 else X
    lo = np.atleast_1d(np.asarray(box[0], dtype=float))
    hi = np.atleast_1d(np.asarray(box[1], dtype=float))
    d = X.shape[1]
    if resolution < 2:
        raise ValueError("resolution must be >= 2 per dimension")
    if float(resolution) ** d > 1e7:
        raise GridTooLarge(f"evaluation grid of size {resolution}^{d} exceeds 1e7 points")
    if lo.size == 1:
        lo = np.full(d, lo[0])
        hi = np.full(d, hi[0])
    axes = [np.linspace(lo[j], hi[j], resolution) for j in range(d)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    dist, _ = cKDTree(X).query(grid)
    return float(dist.max())


def mc_estimate(integrand: Callable, measure: Measure, n: int, seed: int) -> float:
    """Seed-deterministic Monte Carlo sample mean of n integrand evaluations."""
    rng = np.random.default_rng(seed)
    pts = sample(measure, n, rng)
    if pts.shape[1] == 1:
        vals = [float(integrand(float(p[0]))) for p in pts]
    else:
        vals = [float(integrand(p)) for p in pts]
    return float(np.mean(vals))


# ---------------------------------------------------------------------------
# convergence harness
# ---------------------------------------------------------------------------

CSV_COLUMNS = ("method", "n", "d", "ell", "error", "rel_error", "sigma", "jitter", "seed")


@dataclass(frozen=True)
class ConvergenceConfig:
    """One convergence study: integrand, truth, measure, methods, kernels, schedule."""

    integrand: Callable
    truth: float
    measure: Measure
    methods: tuple
    kernels: tuple
    ns: tuple
    point_kind: PointSetKind
    seeds: tuple = (0,)
    space_degree: int = 1
    use_eb: bool = False
    eb_config: EBConfig | None = None
    label: str = "run"


@dataclass(frozen=True)
class ConvergenceRow:
    method: str
    n: int
    d: int
    ell: float | None
    error: float | None
    rel_error: float | None
    sigma: float | None
    jitter: float | None
    seed: int
    flag: str = ""


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    residual: float
    ns_used: tuple


@dataclass
class ConvergenceReport:
    rows: list
    slopes: dict = field(default_factory=dict)


def fit_loglog_slope(ns, errors, drop_initial: int = 2) -> SlopeFit:
    """Least-squares slope of log(error) against log(n).

    The smallest ``drop_initial`` sample sizes are discarded as pre-asymptotic,
    then the fit is restricted to the longest contiguous stretch over which
    the error strictly decreases (machine-precision plateaus would otherwise
    bias the slope toward zero).
    """
    ns = np.asarray(ns, dtype=float)
    errors = np.asarray(errors, dtype=float)
    order = np.argsort(ns)
    ns, errors = ns[order], errors[order]
    keep = slice(drop_initial, None) if len(ns) > drop_initial + 1 else slice(None)
    ns, errors = ns[keep], errors[keep]
    mask = errors > 0
    ns, errors = ns[mask], errors[mask]
    if len(ns) < 2:
        return SlopeFit(slope=float("nan"), residual=float("nan"), ns_used=tuple(int(v) for v in ns))
    # longest strictly decreasing contiguous segment
    best_lo, best_hi = 0, 0
    lo = 0
    for i in range(1, len(errors)):
        if errors[i] < errors[i - 1]:
            if i - lo > best_hi - best_lo:
                best_lo, best_hi = lo, i
        else:
            lo = i
    if best_hi > best_lo:
        ns, errors = ns[best_lo : best_hi + 1], errors[best_lo : best_hi + 1]
    ln, le = np.log(ns), np.log(errors)
    coeffs, res = np.polyfit(ln, le, 1), 0.0
    fitted = np.polyval(coeffs, ln)
    res = float(np.sqrt(np.mean((le - fitted) ** 2)))
    return SlopeFit(slope=float(coeffs[0]), residual=res, ns_used=tuple(int(v) for v in ns))


def _eval_integrand(integrand: Callable, X: NDArray) -> NDArray:
    if X.shape[1] == 1:
        return np.array([float(integrand(float(p[0]))) for p in X])
    return np.array([float(integrand(p)) for p in X])


def _series_key(method: str, ell_label: str) -> str:
    return f"{method}@{ell_label}"


def _one_row(config: ConvergenceConfig, kernel, ell_label, method, n, seed, d) -> ConvergenceRow:
    if method == "mc":
        est = mc_estimate(config.integrand, config.measure, n, seed)
        err = abs(est - config.truth)
        return ConvergenceRow(
            method="mc",
            n=n,
            d=d,
            ell=None,
            error=err,
            rel_error=err / abs(config.truth),
            sigma=None,
            jitter=None,
            seed=seed,
        )
    kind = config.point_kind
    if isinstance(kind, RandomUniformBox):
        kind = dataclasses.replace(kind, seed=seed)
    X = point_set(kind, n, d)
    data = Dataset(X=X, f=_eval_integrand(config.integrand, X))
    if config.use_eb:
        eb = eb_lengthscale(kernel, data, config.eb_config)
        kernel = kernel.with_lengthscale(eb.ell)
    ell_value = float(np.atleast_1d(np.asarray(kernel.lengthscale, dtype=float))[0])
    try:
        if method == "bc":
            result = bc(kernel, config.measure, data)
        elif method == "bsc":
            space = total_degree_space(config.space_degree, d)
            result = bsc(kernel, config.measure, space, data)
        elif method == "nbc":
            result = normalized_bc(kernel, config.measure, data)
        elif method == "square":
            space = total_degree_space(config.space_degree, d)
            result = bsc_square(kernel, config.measure, space, data)
        else:
            raise ValueError(f"unknown method {method!r}")
    except NotUnisolvent as exc:
        return ConvergenceRow(
            method=method,
            n=n,
            d=d,
            ell=ell_value,
            error=None,
            rel_error=None,
            sigma=None,
            jitter=None,
            seed=seed,
            flag=f"not_unisolvent: {exc}",
        )
    err = abs(result.mean - config.truth)
    return ConvergenceRow(
        method=method,
        n=n,
        d=d,
        ell=ell_value,
        error=err,
        rel_error=err / abs(config.truth),
        sigma=result.stddev,
        jitter=result.diagnostics.jitter,
        seed=seed,
    )


def convergence_run(config: ConvergenceConfig, max_workers: int = 1) -> ConvergenceReport:
    """Run every (method, kernel, n, seed) cell and fit per-series slopes.

    Rows are independent tasks; results are merged in (method, ell, n, seed)
    sort order regardless of completion order, so the output is deterministic
    for any worker count.
    """
    d = _measure_dim(config.measure)
    tasks = []
    for kernel in config.kernels:
        ell_label = "eb" if config.use_eb else _format_ell(kernel)
        for method in config.methods:
            if method == "mc" and kernel is not config.kernels[0]:
                continue  # mc does not depend on the kernel; emit one series
            for n in config.ns:
                for seed in config.seeds:
                    tasks.append((kernel, ell_label, method, n, seed))

    def run(task):
        kernel, ell_label, method, n, seed = task
        return ell_label, _one_row(config, kernel, ell_label, method, n, seed, d)

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(run, tasks))
    else:
        results = [run(t) for t in tasks]

    labelled = sorted(
        results, key=lambda r: (r[1].method, r[0], r[1].n, r[1].seed)
    )
    rows = [row for _, row in labelled]

    report = ConvergenceReport(rows=rows)
    series: dict = {}
    for label, row in labelled:
        if row.error is None:
            continue
        key = _series_key(row.method, label if row.method != "mc" else "mc")
        series.setdefault(key, {}).setdefault(row.n, []).append(row.error)
    for key, by_n in series.items():
        ns = sorted(by_n)
        med = [float(np.median(by_n[n])) for n in ns]
        report.slopes[key] = fit_loglog_slope(ns, med)
    return report


def _measure_dim(measure: Measure) -> int:
    from .measures import dimension

    return dimension(measure)


def _format_ell(kernel: KernelSpec) -> str:
    ells = np.atleast_1d(np.asarray(kernel.lengthscale, dtype=float))
    return repr(float(ells[0]))


# ---------------------------------------------------------------------------
# artifacts
# ---------------------------------------------------------------------------


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def rows_to_csv(rows, path, config_echo: dict | None = None) -> None:
    """Write rows in the fixed column order, preceded by one config comment line.

    The body is byte-deterministic for identical inputs; timestamps live in
    the separate run manifest, never here.
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if config_echo is not None:
            fh.write("# config: " + json.dumps(config_echo, sort_keys=True) + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow(
                [
                    row.method,
                    row.n,
                    row.d,
                    _cell(row.ell),
                    _cell(row.error),
                    _cell(row.rel_error),
                    _cell(row.sigma),
                    _cell(row.jitter),
                    row.seed,
                ]
            )


def write_manifest(path, config_echo: dict, extra: dict | None = None) -> None:
    """Run manifest: full config echo, package version, wall-clock timestamp."""
    from . import __version__

    manifest = {
        "config": config_echo,
        "version": __version__,
        "created_unix": time.time(),
    }
    if extra:
        manifest.update(extra)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
