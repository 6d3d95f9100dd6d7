import numpy as np
import pytest

from fil.grids import NuDensity, build_measure, default_grid


@pytest.fixture(scope="session")
def uniform2001():
    return build_measure("uniform", default_grid("uniform", 2001))


@pytest.fixture(scope="session")
def jacobi2001():
    return build_measure("jacobi:n=4", default_grid("jacobi:n=4", 2001))


@pytest.fixture(scope="session")
def jacobi4001():
    return build_measure("jacobi:n=4", default_grid("jacobi:n=4", 4001))


@pytest.fixture(scope="session")
def gaussian4001():
    return build_measure("gaussian", default_grid("gaussian", 4001))


@pytest.fixture(scope="session")
def uniform_nu(uniform2001):
    return NuDensity.from_measure(uniform2001)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(12345)
