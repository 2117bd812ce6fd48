"""Gaussian-process regression with a parametric mean component.

Two conditioning modes are supported.  With a finite coefficient covariance
the posterior is computed through the marginal kernel matrix K + P S P^T,
which is symmetric positive definite and therefore Cholesky-friendly; the
indefinite block form of the same system serves as a test oracle only.  In
the flat-prior limit (coefficient precision -> 0) the posterior is defined
through the saddle-point system

    [[K, P], [P^T, 0]] [alpha; beta] = [f_X; -eta],

which is invertible exactly when the nodes are unisolvent for the space.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray
from scipy.linalg import LinAlgError, cho_solve, cholesky

from .errors import NotUnisolvent
from .kernels import KernelSpec, kernel_matrix
from .linalg import JitterPolicy, SpdFactor, jittered_factorize, solve_saddle
from .polyspace import FunctionSpace, evaluate_basis, is_unisolvent

__all__ = [
    "PriorSpec",
    "Dataset",
    "PosteriorGP",
    "flat_prior",
    "finite_prior",
    "condition",
    "posterior_mean",
    "posterior_cov",
    "lagrange_functions",
]


@dataclass(frozen=True, eq=False)
class PriorSpec:
    """Hierarchical prior: parametric mean space, coefficient covariance, coefficient mean.

    ``coefficient_cov`` is a Q x Q SPD array for the finite mode or None for
    the flat-prior limit.  ``coefficient_mean`` defaults to zero.
    """

    space: FunctionSpace
    coefficient_cov: NDArray | None = None
    coefficient_mean: NDArray | None = None

    @property
    def is_flat(self) -> bool:
        return self.coefficient_cov is None

    def eta(self) -> NDArray:
        if self.coefficient_mean is None:
            return np.zeros(self.space.Q)
        eta = np.asarray(self.coefficient_mean, dtype=float)
        if eta.shape != (self.space.Q,):
            raise ValueError(f"coefficient mean must have shape ({self.space.Q},)")
        return eta


def flat_prior(space: FunctionSpace, coefficient_mean=None) -> PriorSpec:
    return PriorSpec(space=space, coefficient_cov=None, coefficient_mean=coefficient_mean)


def finite_prior(space: FunctionSpace, coefficient_cov, coefficient_mean=None) -> PriorSpec:
    cov = np.asarray(coefficient_cov, dtype=float)
    if cov.shape != (space.Q, space.Q):
        raise ValueError(f"coefficient covariance must be ({space.Q}, {space.Q})")
    return PriorSpec(space=space, coefficient_cov=cov, coefficient_mean=coefficient_mean)


@dataclass(eq=False)
class Dataset:
    """Evaluation nodes and integrand values; nodes must be pairwise distinct."""

    X: NDArray
    f: NDArray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        f = np.asarray(self.f, dtype=float).reshape(-1)
        if X.shape[0] != f.shape[0] or X.shape[0] < 1:
            raise ValueError(f"inconsistent data shapes: X {X.shape}, f {f.shape}")
        if np.unique(X, axis=0).shape[0] != X.shape[0]:
            raise ValueError("evaluation nodes must be pairwise distinct")
        self.X = X
        self.f = f

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]


@dataclass(eq=False)
class PosteriorGP:
    """Conditioned process; immutable after construction, safe to share."""

    mode: str  # "flat" | "finite"
    kernel: KernelSpec
    space: FunctionSpace
    data: Dataset
    alpha: NDArray
    beta: NDArray
    eta: NDArray
    P: NDArray
    K_factor: SpdFactor | None = None       # flat mode
    schur_chol: NDArray | None = None       # flat mode: chol of P^T K^{-1} P
    W: NDArray | None = None                # flat mode: K^{-1} P
    M_factor: SpdFactor | None = None       # finite mode: chol of K + P S P^T
    coefficient_cov: NDArray | None = None  # finite mode
    diagnostics: dict = field(default_factory=dict)


def condition(
    prior: PriorSpec,
    kernel: KernelSpec,
    data: Dataset,
    jitter: JitterPolicy | None = None,
) -> PosteriorGP:
    """Condition the prior on exact evaluations at distinct nodes.

    Raises :class:`NotUnisolvent` in the flat mode when the nodes fail the
    unisolvency check for the parametric space.
    """
    space = prior.space
    P = evaluate_basis(space, data.X)
    eta = prior.eta()
    K = kernel_matrix(kernel, data.X, data.X)
    if prior.is_flat:
        if space.Q > 0 and not is_unisolvent(space, data.X):
            raise NotUnisolvent(
                f"flat-prior conditioning needs unisolvent nodes: n={data.n}, Q={space.Q}"
            )
        K_factor = jittered_factorize(K, jitter)
        sol = solve_saddle(K_factor, P, data.f, -eta)
        W = K_factor.solve(P) if space.Q > 0 else np.zeros((data.n, 0))
        schur_chol = None
        if space.Q > 0:
            S = P.T @ W
            schur_chol = cholesky(0.5 * (S + S.T), lower=True)
        return PosteriorGP(
            mode="flat",
            kernel=kernel,
            space=space,
            data=data,
            alpha=sol.top,
            beta=sol.bottom,
            eta=eta,
            P=P,
            K_factor=K_factor,
            schur_chol=schur_chol,
            W=W,
            diagnostics={"jitter": K_factor.jitter_used},
        )
    cov = prior.coefficient_cov
    try:
        cholesky(cov, lower=True)
    except LinAlgError as exc:
        raise ValueError("coefficient covariance must be symmetric positive definite") from exc
    M = K + P @ cov @ P.T
    M_factor = jittered_factorize(M, jitter)
    resid = M_factor.solve(data.f - P @ eta)
    alpha = resid
    beta = eta + cov @ (P.T @ resid)
    return PosteriorGP(
        mode="finite",
        kernel=kernel,
        space=space,
        data=data,
        alpha=alpha,
        beta=beta,
        eta=eta,
        P=P,
        M_factor=M_factor,
        coefficient_cov=cov,
        diagnostics={"jitter": M_factor.jitter_used},
    )


def _query(post: PosteriorGP, x):
    """Normalize query points to (m, d); report whether the input was a single point."""
    x = np.asarray(x, dtype=float)
    d = post.data.d
    if x.ndim == 0:
        if d != 1:
            raise ValueError(f"scalar query point for {d}-dimensional data")
        return x.reshape(1, 1), True
    if x.ndim == 1:
        if d == 1:
            return x.reshape(-1, 1), x.shape[0] == 1
        if x.shape[0] == d:
            return x.reshape(1, d), True
        raise ValueError(f"query point has dimension {x.shape[0]}, data has {d}")
    if x.ndim == 2 and x.shape[1] == d:
        return x, False
    raise ValueError(f"query points have shape {x.shape}, expected (m, {d})")


def posterior_mean(post: PosteriorGP, x) -> float | NDArray:
    """Posterior mean k_X(x) alpha + p(x) beta at one point or an array of points."""
    Xq, single = _query(post, x)
    kq = kernel_matrix(post.kernel, Xq, post.data.X)
    pq = evaluate_basis(post.space, Xq)
    out = kq @ post.alpha + pq @ post.beta
    return float(out[0]) if single else out


def posterior_cov(post: PosteriorGP, x, x_prime) -> float | NDArray:
    """Posterior covariance between points; returns a matrix for array inputs."""
    Xa, single_a = _query(post, x)
    Xb, single_b = _query(post, x_prime)
    k_ab = kernel_matrix(post.kernel, Xa, Xb)
    ka = kernel_matrix(post.kernel, Xa, post.data.X)
    kb = kernel_matrix(post.kernel, Xb, post.data.X)
    pa = evaluate_basis(post.space, Xa)
    pb = evaluate_basis(post.space, Xb)
    if post.mode == "flat":
        out = k_ab - ka @ post.K_factor.solve(kb.T)
        if post.space.Q > 0:
            A = ka @ post.W - pa
            B = kb @ post.W - pb
            out = out + A @ cho_solve((post.schur_chol, True), B.T)
    else:
        cov = post.coefficient_cov
        ba = ka + pa @ cov @ post.P.T
        bb = kb + pb @ cov @ post.P.T
        out = k_ab + pa @ cov @ pb.T - ba @ post.M_factor.solve(bb.T)
    return float(out[0, 0]) if single_a and single_b else out


def lagrange_functions(post: PosteriorGP, x) -> tuple[NDArray, NDArray]:
    """Cardinal-function values (u(x), v(x)) solving the block system at x.

    At a data node x_j these satisfy u(x_j) = e_j and v(x_j) = 0, and the
    posterior mean equals u(x)^T f_X - v(x)^T eta.
    """
    Xq, single = _query(post, x)
    if not single:
        raise ValueError("lagrange_functions expects a single point")
    kq = kernel_matrix(post.kernel, Xq, post.data.X)[0]
    pq = evaluate_basis(post.space, Xq)[0]
    if post.mode == "flat":
        sol = solve_saddle(post.K_factor, post.P, kq, pq)
        return sol.top, sol.bottom
    cov = post.coefficient_cov
    u = post.M_factor.solve(kq + post.P @ (cov @ pq))
    v = cov @ (post.P.T @ u - pq)
    return u, v
