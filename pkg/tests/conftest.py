import numpy as np
import pytest


def random_spd(rng, dim, cond=50.0):
    """SPD matrix with eigenvalues spread over ``[1, cond]`` and a random basis."""
    q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    eig = np.geomspace(1.0, cond, dim) if dim > 1 else np.array([cond])
    m = (q * eig) @ q.T
    return (m + m.T) / 2.0


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
