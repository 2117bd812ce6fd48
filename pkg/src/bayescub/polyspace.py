"""Parametric function spaces: bases, Vandermonde matrices, unisolvency checks.

The default basis for a total-degree polynomial space is the monomials in
graded lexicographic order.  Basis elements are either multi-indices
(tuples of non-negative ints) or opaque callables mapping a point in R^d
to a real, which supports generalised Chebyshev systems and indicator-style
constructions.  An optional affine node rescaling tames Vandermonde
conditioning at larger degree; in exact arithmetic it is absorbed by the
parametric coefficients and leaves cubature outputs unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Callable, Union

import numpy as np
from numpy.typing import NDArray

from .errors import DimensionMismatch
from .linalg import numeric_rank

__all__ = [
    "BasisElement",
    "FunctionSpace",
    "Vandermonde",
    "empty_space",
    "total_degree_space",
    "custom_space",
    "rescaled_space",
    "evaluate_basis",
    "vandermonde",
    "is_unisolvent",
]

BasisElement = Union[tuple, Callable[[NDArray], float]]


@dataclass(frozen=True)
class FunctionSpace:
    """Finite-dimensional space of real-valued functions on R^d.

    ``shift``/``scale`` define the affine map y = (x - shift)/scale applied
    before monomial evaluation (identity when None); they do not apply to
    callable basis elements.
    """

    basis: tuple
    dim: int
    degree: int | None = None
    shift: tuple | None = None
    scale: tuple | None = None

    def __post_init__(self):
        indices = [b for b in self.basis if isinstance(b, tuple)]
        if len(set(indices)) != len(indices):
            raise ValueError("basis multi-indices must be distinct")
        for alpha in indices:
            if len(alpha) != self.dim or any(a < 0 for a in alpha):
                raise ValueError(f"bad multi-index {alpha} for dimension {self.dim}")
        if self.scale is not None and any(s <= 0 for s in self.scale):
            raise ValueError("scale entries must be positive")

    @property
    def Q(self) -> int:
        return len(self.basis)

    @property
    def is_monomial(self) -> bool:
        return all(isinstance(b, tuple) for b in self.basis)


@dataclass(frozen=True)
class Vandermonde:
    """n x Q matrix [P]_{ij} = p_j(x_i) with references to its inputs."""

    matrix: NDArray
    nodes: NDArray
    space: FunctionSpace


def empty_space(d: int) -> FunctionSpace:
    """The trivial space (Q = 0); conditioning on it recovers a centred prior."""
    return FunctionSpace(basis=(), dim=d)


def _graded_lex_indices(m: int, d: int):
    def parts(total, slots):
        if slots == 1:
            yield (total,)
            return
        for first in range(total, -1, -1):
            for rest in parts(total - first, slots - 1):
                yield (first,) + rest

    for total in range(m + 1):
        yield from parts(total, d)


def total_degree_space(m: int, d: int) -> FunctionSpace:
    """All monomials x^alpha with |alpha| <= m in graded lexicographic order.

    The resulting dimension is Q = C(m + d, d).
    """
    if m < 0 or d < 1:
        raise ValueError(f"need m >= 0 and d >= 1, got m={m}, d={d}")
    basis = tuple(_graded_lex_indices(m, d))
    assert len(basis) == comb(m + d, d)
    return FunctionSpace(basis=basis, dim=d, degree=m)


def custom_space(functions, d: int) -> FunctionSpace:
    """Space spanned by opaque callables, each mapping a length-d point to a real."""
    return FunctionSpace(basis=tuple(functions), dim=d)


def rescaled_space(space: FunctionSpace, X) -> FunctionSpace:
    """Same monomial basis, with nodes affinely mapped onto [-1, 1]^d first."""
    if not space.is_monomial:
        raise ValueError("rescaling applies to monomial bases only")
    X = _as_nodes(X, space.dim)
    lo, hi = X.min(axis=0), X.max(axis=0)
    shift = 0.5 * (lo + hi)
    scale = np.where(hi > lo, 0.5 * (hi - lo), 1.0)
    return FunctionSpace(
        basis=space.basis,
        dim=space.dim,
        degree=space.degree,
        shift=tuple(float(s) for s in shift),
        scale=tuple(float(s) for s in scale),
    )


def _as_nodes(X, d: int | None = None) -> NDArray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if X.ndim != 2:
        raise DimensionMismatch(f"expected nodes of shape (n, d), got {X.shape}")
    if d is not None and X.shape[1] != d:
        raise DimensionMismatch(f"nodes have dimension {X.shape[1]}, space has dimension {d}")
    return X


def evaluate_basis(space: FunctionSpace, X) -> NDArray:
    """Evaluate every basis function at every node; returns an (n, Q) array."""
    X = _as_nodes(X, space.dim)
    n = X.shape[0]
    if space.Q == 0:
        return np.zeros((n, 0))
    Y = X
    if space.shift is not None or space.scale is not None:
        shift = np.asarray(space.shift if space.shift is not None else np.zeros(space.dim))
        scale = np.asarray(space.scale if space.scale is not None else np.ones(space.dim))
        Y = (X - shift) / scale
    cols = []
    for b in space.basis:
        if isinstance(b, tuple):
            cols.append(np.prod(Y ** np.asarray(b, dtype=float), axis=1))
        else:
            cols.append(np.array([float(b(x)) for x in X]))
    return np.column_stack(cols)


def vandermonde(space: FunctionSpace, X) -> Vandermonde:
    """Assemble the Vandermonde matrix of the space on the given nodes."""
    X = _as_nodes(X, space.dim)
    M = evaluate_basis(space, X)
    if not np.all(np.isfinite(M)):
        raise ValueError("Vandermonde entries must be finite")
    return Vandermonde(matrix=M, nodes=X, space=space)


def is_unisolvent(space: FunctionSpace, X) -> bool:
    """True iff |X| >= Q and the Vandermonde matrix has full column rank."""
    X = _as_nodes(X, space.dim)
    if space.Q == 0:
        return True
    if X.shape[0] < space.Q:
        return False
    return numeric_rank(vandermonde(space, X).matrix) == space.Q
