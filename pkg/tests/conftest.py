import numpy as np
import pytest


def philox(seed, stream=0):
    return np.random.Generator(np.random.Philox(key=np.array([seed, stream], dtype=np.uint64)))


@pytest.fixture
def rng():
    return philox(1234)
