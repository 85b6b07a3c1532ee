import numpy as np
import pytest

from slabflow import Grid, Params


@pytest.fixture
def grid8():
    return Grid(8, 8, 8)


@pytest.fixture
def grid16():
    return Grid(16, 16, 16)


@pytest.fixture
def grid_small():
    """Anisotropic grid for solver tests; cheap but non-degenerate."""
    return Grid(16, 16, 8)


@pytest.fixture
def rng():
    return np.random.default_rng(42)


def make_params(grid, eps=0.1, **overrides) -> Params:
    defaults = dict(rho0=1.0, gamma=2.0, mu=1.0, lam=1.0, eps=eps, grid=grid)
    defaults.update(overrides)
    return Params(**defaults)


@pytest.fixture
def params16(grid16):
    return make_params(grid16)


@pytest.fixture
def params_small(grid_small):
    return make_params(grid_small)


def random_even_samples(rng, grid) -> np.ndarray:
    f = rng.standard_normal(grid.shape3)
    return 0.5 * (f + f[:, :, grid.flip_z])


def random_odd_samples(rng, grid) -> np.ndarray:
    f = rng.standard_normal(grid.shape3)
    return 0.5 * (f - f[:, :, grid.flip_z])
