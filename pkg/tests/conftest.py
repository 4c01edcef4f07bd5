import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from qstar.algebra import make_full_matrix_algebra, make_tensor_algebra

settings.register_profile(
    "default",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def m2():
    return make_full_matrix_algebra(2)


@pytest.fixture(scope="session")
def m3():
    return make_full_matrix_algebra(3)


@pytest.fixture(scope="session")
def m2m2(m2):
    return make_tensor_algebra(m2, m2)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def matrix_unit(n, i, j):
    e = np.zeros((n, n), dtype=complex)
    e[i, j] = 1.0
    return e
