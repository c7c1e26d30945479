import numpy as np
import pytest

from lyness import ParameterCycle


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def log_uniform(rng, lo, hi, size=None):
    return np.exp(rng.uniform(np.log(lo), np.log(hi), size=size))


def random_cycle(rng, k, lo=0.1, hi=10.0):
    while True:
        c = ParameterCycle(log_uniform(rng, lo, hi, k))
        if c.primitive_period == k:
            return c
