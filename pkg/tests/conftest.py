import numpy as np
import pytest

from prmix import IndexGrid, KernelFamily, WeightSchedule


@pytest.fixture
def gaussian_family():
    return KernelFamily("gaussian")


@pytest.fixture
def gamma_family():
    return KernelFamily("gamma")


@pytest.fixture
def small_gaussian_grid():
    return IndexGrid([-5.0, 0.5], [5.0, 3.0], [8, 6])


@pytest.fixture
def small_gamma_grid():
    return IndexGrid([0.5, 0.1], [10.0, 5.0], [8, 6], ["linear", "log"])


@pytest.fixture
def schedule():
    return WeightSchedule.power(0.67)


def rng_for(seed):
    return np.random.default_rng(seed)
