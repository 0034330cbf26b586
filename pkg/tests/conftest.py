import numpy as np
import pytest

from psidolab import Grid, SampledFunction


@pytest.fixture
def grid_1d():
    return Grid(1, 256, 8.0)


@pytest.fixture
def grid_2d():
    return Grid(2, 64, 4.0)


def gaussian(grid: Grid, width: float = 1.0) -> SampledFunction:
    mesh = grid.meshgrid()
    r2 = sum(c**2 for c in mesh)
    return SampledFunction(grid, np.exp(-0.5 * r2 / width**2))
