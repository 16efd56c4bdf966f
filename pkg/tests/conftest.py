import numpy as np
import pytest

from qgspec.graph import (LengthSampler, build_complete, build_cube, build_cycle,
                          build_octahedron, sample_lengths)


@pytest.fixture(scope="session")
def octahedron():
    return sample_lengths(build_octahedron(), LengthSampler(0))


@pytest.fixture(scope="session")
def cube():
    return sample_lengths(build_cube(), LengthSampler(0))


@pytest.fixture(scope="session")
def k5():
    return sample_lengths(build_complete(5), LengthSampler(0))


@pytest.fixture(scope="session")
def triangle():
    return sample_lengths(build_cycle(3), LengthSampler(0))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
