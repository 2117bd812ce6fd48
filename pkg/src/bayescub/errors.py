"""Exception hierarchy shared across the package."""


class CubatureError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(CubatureError):
    """Point, kernel, or measure dimensions are inconsistent."""


class FactorizationFailed(CubatureError):
    """No entry of the jitter schedule produced a positive-definite factorization."""


class RankDeficient(CubatureError):
    """The Schur complement could not be factorized (non-unisolvent nodes)."""


class NotUnisolvent(CubatureError):
    """The node set does not determine the parametric space uniquely."""


class UnsupportedCombination(CubatureError):
    """No closed form or quadrature fallback applies to this kernel/measure pair."""


class ZeroWeight(CubatureError):
    """A cubature rule with a zero weight cannot be endowed with a probabilistic output."""


class DomainBoundary(CubatureError):
    """A unit-cube coordinate sits exactly on the boundary {0, 1}."""


class GridTooLarge(CubatureError):
    """The requested evaluation grid exceeds the allowed size."""


class ConfigError(CubatureError):
    """Invalid or unknown configuration input (CLI exit code 2)."""
