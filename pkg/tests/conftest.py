import numpy as np
import pytest


def random_psd(rng, n, rank=None):
    """Random PSD matrix of the given rank (full rank by default)."""
    r = n if rank is None else rank
    X = rng.standard_normal((n, r))
    return X @ X.T


def two_cliques(w_bridge=0.01):
    """Two 4-cliques (vertices 0-3 and 4-7) joined by one weak edge 3-4."""
    W = np.zeros((8, 8))
    for block in (range(4), range(4, 8)):
        for i in block:
            for j in block:
                if i != j:
                    W[i, j] = 1.0
    W[3, 4] = W[4, 3] = w_bridge
    return W


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
