import numpy as np
import pytest


def blobs(seed, n=None, J=None, K=None, spread=4.0):
    """Gaussian mixture with random sizes; returns ``(x, K)``."""
    rng = np.random.default_rng(seed)
    K = int(rng.integers(2, 6)) if K is None else K
    J = int(rng.integers(1, 11)) if J is None else J
    n = int(rng.integers(10 * K, 201)) if n is None else n
    means = rng.normal(0.0, spread, (K, J))
    x = means[rng.integers(0, K, n)] + rng.standard_normal((n, J))
    return x, K


@pytest.fixture
def make_blobs():
    return blobs
