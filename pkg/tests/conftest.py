import math

import pytest

from pybusemann import EuclideanCone, LpSpace, SphericalCap


@pytest.fixture
def plane():
    return LpSpace(p=2, n=2)


@pytest.fixture
def l4():
    return LpSpace(p=4, n=2)


@pytest.fixture
def cone():
    return EuclideanCone(theta=4.0)


@pytest.fixture
def cap():
    return SphericalCap(cap=1.0)


@pytest.fixture
def half_plane_cone():
    return EuclideanCone(theta=math.pi)
