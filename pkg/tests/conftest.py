import numpy as np
import pytest

from vislim.domain import Grid2D, SimParams


@pytest.fixture
def params():
    return SimParams()


@pytest.fixture
def small_grid():
    return Grid2D(32, 48, stretch=2.0)


@pytest.fixture
def uniform_grid():
    return Grid2D(48, 64, y_max=4.0, stretch=0.0)


def l2_field(grid, arr):
    return float(np.sqrt(np.sum(arr ** 2 * grid.quad_weights_y()) * grid.dx))
