import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20260819)


def random_points(rng, n, lo=-1.0, hi=1.0):
    return rng.uniform(lo, hi, size=(n, 3))
