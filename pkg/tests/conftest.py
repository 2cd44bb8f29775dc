import os
import sys

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


def random_pc_weight(rng, n_max=6, T=1.0, scale=10.0):
    from weaksing.weights import PiecewiseConstant

    n = int(rng.integers(2, n_max + 1))
    b = np.sort(rng.uniform(0, T, n - 1))
    b = np.concatenate([[0.0], b])
    if np.any(np.diff(np.append(b, T)) < 1e-3 * T):
        b = np.arange(n) * T / n
    v = rng.uniform(-scale, scale, n)
    return PiecewiseConstant(T, b, v)


def random_two_value(rng):
    """Admissible two-value data near balance, where a solution is known to exist."""
    from weaksing.timemap import TwoValueProblem

    lam = rng.uniform(0.2, 0.8)
    T = rng.uniform(0.5, 2.0)
    eta = T * rng.uniform(0.3, 0.7)
    h1 = rng.uniform(20, 80)
    h2 = h1 * eta / (T - eta) * (1 + rng.uniform(0.002, 0.02))
    return TwoValueProblem(lam, T, eta, h1, h2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
