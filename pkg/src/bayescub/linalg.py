"""Robust factorizations and saddle-point solvers.

Kernel matrices become severely ill-conditioned for smooth kernels or
clustered nodes, so every symmetric positive-definite solve goes through
a Cholesky factorization with an escalating absolute diagonal shift.
The block system

    [[K, P], [P^T, 0]] [top; bottom] = [b_top; b_bottom]

is solved through the Schur complement S = P^T K^{-1} P, which lets the
triangular factors of K be reused across right-hand sides.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy.linalg import LinAlgError, cho_solve, cholesky

from .errors import FactorizationFailed, RankDeficient

__all__ = [
    "JitterPolicy",
    "SpdFactor",
    "SaddleSolution",
    "jittered_factorize",
    "refined_solve",
    "solve_saddle",
    "numeric_rank",
]


@dataclass(frozen=True)
class JitterPolicy:
    """Escalating diagonal-shift schedule, relative to the mean diagonal.

    Candidate shifts are {0, tau*mbar, 10*tau*mbar, ..., 10^(decades-1)*tau*mbar}
    where mbar is the mean diagonal of the matrix being factorized.
    """

    tau: float = 1e-12
    decades: int = 9

    def schedule(self, mean_diag: float) -> list[float]:
        base = max(mean_diag, 0.0)
        return [0.0] + [self.tau * base * 10.0**k for k in range(self.decades)]


DEFAULT_JITTER = JitterPolicy()


@dataclass(frozen=True)
class SpdFactor:
    """Lower-triangular Cholesky factor of A + jitter_used * I.

    The unshifted matrix is retained so that saddle-point solves can run
    iterative refinement against the true residual.
    """

    factor: NDArray
    jitter_used: float
    log_det: float
    matrix: NDArray | None = None

    @property
    def n(self) -> int:
        return self.factor.shape[0]

    def solve(self, b: NDArray) -> NDArray:
        """Solve (A + jitter_used*I) x = b for vector or matrix b."""
        return cho_solve((self.factor, True), b)


@dataclass(frozen=True)
class SaddleSolution:
    top: NDArray
    bottom: NDArray


def jittered_factorize(A: NDArray, policy: JitterPolicy | None = None) -> SpdFactor:
    """Cholesky-factorize a symmetric matrix, escalating the diagonal shift on failure.

    Only the lower triangle of ``A`` is referenced.  Raises
    :class:`FactorizationFailed` when every schedule entry fails, which signals
    an indefinite or catastrophically conditioned matrix.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    policy = policy or DEFAULT_JITTER
    mean_diag = float(np.mean(np.diag(A)))
    eye = np.eye(A.shape[0])
    for jitter in policy.schedule(mean_diag):
        try:
            L = cholesky(A + jitter * eye, lower=True)
        except LinAlgError:
            continue
        log_det = 2.0 * float(np.sum(np.log(np.diag(L))))
        return SpdFactor(factor=L, jitter_used=jitter, log_det=log_det, matrix=A)
    raise FactorizationFailed(
        f"no jitter in the schedule produced a positive-definite factorization "
        f"(n={A.shape[0]}, mean diagonal={mean_diag:.3e})"
    )


def refined_solve(K: SpdFactor, b: NDArray, max_refine: int = 3) -> NDArray:
    """Solve A x = b through the factor with guarded iterative refinement.

    Refinement runs against the unshifted matrix, so it also removes the bias
    introduced by a nonzero diagonal shift whenever the iteration contracts.
    """
    b = np.asarray(b, dtype=float)
    x = K.solve(b)
    A = K.matrix
    if A is None or max_refine == 0:
        return x
    scale = 1.0 + float(np.max(np.abs(b))) if b.size else 1.0
    r = b - A @ x
    best, best_norm = x, float(np.max(np.abs(r))) if r.size else 0.0
    for _ in range(max_refine):
        if best_norm <= 1e-14 * scale:
            break
        x = x + K.solve(r)
        r = b - A @ x
        norm = float(np.max(np.abs(r)))
        if norm >= best_norm:
            break
        best, best_norm = x, norm
    return best


def solve_saddle(
    K: SpdFactor,
    P: NDArray,
    b_top: NDArray,
    b_bottom: NDArray,
    max_refine: int = 3,
) -> SaddleSolution:
    """Solve [[K, P], [P^T, 0]] [top; bottom] = [b_top; b_bottom].

    Uses the Schur complement S = P^T K^{-1} P:

        bottom = S^{-1} (P^T K^{-1} b_top - b_bottom)
        top    = K^{-1} (b_top - P bottom)

    followed by guarded iterative refinement against the unshifted matrix,
    which recovers the digits lost to kernel-matrix conditioning (and to the
    diagonal shift itself).  ``P`` must have full column rank; a failed
    factorization of S raises :class:`RankDeficient`, which signals
    non-unisolvent nodes.  Right-hand sides may be vectors or stacked columns.
    """
    P = np.asarray(P, dtype=float)
    b_top = np.asarray(b_top, dtype=float)
    b_bottom = np.asarray(b_bottom, dtype=float)
    n, q = P.shape
    if q == 0:
        bottom_shape = (0,) if b_top.ndim == 1 else (0, b_top.shape[1])
        return SaddleSolution(top=refined_solve(K, b_top, max_refine), bottom=np.zeros(bottom_shape))
    W = K.solve(P)
    S = P.T @ W
    S = 0.5 * (S + S.T)
    try:
        Ls = cholesky(S, lower=True)
    except LinAlgError as exc:
        raise RankDeficient(
            f"Schur complement of size {q} is not positive definite; "
            "the Vandermonde block is rank deficient"
        ) from exc

    def schur_solve(rt, rb):
        db = cho_solve((Ls, True), P.T @ K.solve(rt) - rb)
        dt = K.solve(rt - P @ db)
        return dt, db

    top, bottom = schur_solve(b_top, b_bottom)
    A = K.matrix
    if A is not None and max_refine > 0:
        scale = 1.0 + max(float(np.max(np.abs(b_top))), float(np.max(np.abs(b_bottom))))

        def residual(t, b):
            r_top = b_top - (A @ t + P @ b)
            r_bot = b_bottom - P.T @ t
            return r_top, r_bot, max(float(np.max(np.abs(r_top))), float(np.max(np.abs(r_bot))))

        r_top, r_bot, best_norm = residual(top, bottom)
        best = (top, bottom)
        for _ in range(max_refine):
            if best_norm <= 1e-14 * scale:
                break
            dt, db = schur_solve(r_top, r_bot)
            top, bottom = top + dt, bottom + db
            r_top, r_bot, norm = residual(top, bottom)
            if norm >= best_norm:  # refinement stalled or diverged (huge shift)
                break
            best, best_norm = (top, bottom), norm
        top, bottom = best
    return SaddleSolution(top=top, bottom=bottom)


def numeric_rank(M: NDArray) -> int:
    """Numerical rank from the SVD with threshold max(n,Q) * eps * sigma_max."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    return int(np.linalg.matrix_rank(M))
