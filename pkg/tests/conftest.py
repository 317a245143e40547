import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_positive_weight(rng, period=2.0, base=None):
    """Smooth strictly positive periodic weight on [0, period]."""
    c0 = base if base is not None else rng.uniform(0.5, 3.0)
    amp = c0 * rng.uniform(0.0, 0.8)
    k = int(rng.integers(1, 4))
    phase = rng.uniform(0, 2 * np.pi)
    return lambda x: c0 + amp * np.sin(2 * np.pi * k * np.asarray(x) / period + phase)


def random_quadratic(rng, scale=1.0):
    return rng.normal(scale=scale, size=3)
