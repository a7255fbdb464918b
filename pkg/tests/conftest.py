import numpy as np
import pytest

from dpcdf import RngSeed


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def seed():
    return RngSeed(12345)
