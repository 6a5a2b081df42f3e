import pytest

from oseen2d.field import Grid, ScalarField
from oseen2d.oseen import gaussian_profile


@pytest.fixture(scope="session")
def grid128():
    return Grid(128, 40.0)


@pytest.fixture(scope="session")
def grid256():
    return Grid(256, 40.0)


@pytest.fixture(scope="session")
def gauss128(grid128):
    xx, yy = grid128.meshes()
    return ScalarField(grid128, gaussian_profile(xx, yy))


@pytest.fixture(scope="session")
def gauss256(grid256):
    xx, yy = grid256.meshes()
    return ScalarField(grid256, gaussian_profile(xx, yy))


@pytest.fixture(scope="session")
def dx_gauss128(grid128):
    xx, yy = grid128.meshes()
    return ScalarField(grid128, -0.5 * xx * gaussian_profile(xx, yy))


@pytest.fixture(scope="session")
def dx_gauss256(grid256):
    xx, yy = grid256.meshes()
    return ScalarField(grid256, -0.5 * xx * gaussian_profile(xx, yy))
