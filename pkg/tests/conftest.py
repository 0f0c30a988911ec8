import numpy as np
import pytest

from sart.grids import DataGrid, Disc, ImageGrid, PhantomSpec


@pytest.fixture
def ch2_disc():
    return Disc((0.0, 25.0), 20.0, 10.0)


@pytest.fixture
def half_plane_grid():
    return ImageGrid(nx=129, ny=65, dx=1.0, dy=1.0, x0=-64.0, y0=0.0)


@pytest.fixture
def ch2_phantom(ch2_disc):
    return PhantomSpec((ch2_disc,))


@pytest.fixture
def small_data_grid():
    return DataGrid.from_bounds(-16.0, 16.0, 16.0, 1.0, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
