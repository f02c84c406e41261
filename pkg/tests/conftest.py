import numpy as np
import pytest

from seqdiff.core import Rng


@pytest.fixture
def rng():
    return Rng(12345)


@pytest.fixture
def gen():
    return np.random.default_rng(2024)
