import numpy as np
import pytest
from hypothesis import settings

from gradplate.material import REFERENCE, derive_coefficients

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


@pytest.fixture
def ref():
    return derive_coefficients(REFERENCE)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
