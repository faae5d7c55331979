import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def within_se(estimate, target, se, k=4.0):
    return abs(estimate - target) <= k * se
