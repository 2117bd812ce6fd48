import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_spd(rng: np.random.Generator, n: int) -> np.ndarray:
    """Well-conditioned random SPD matrix."""
    A = rng.standard_normal((n, n))
    return A @ A.T + n * np.eye(n)
