import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from besovpde import TorusGrid, dyadic_partition


@pytest.fixture(scope="session")
def grid64():
    return TorusGrid(d=1, n=64)


@pytest.fixture(scope="session")
def grid128():
    return TorusGrid(d=1, n=128)


@pytest.fixture(scope="session")
def grid256():
    return TorusGrid(d=1, n=256)


@pytest.fixture(scope="session")
def grid2d():
    return TorusGrid(d=2, n=32)


@pytest.fixture(scope="session")
def part64(grid64):
    return dyadic_partition(grid64)


@pytest.fixture(scope="session")
def part128(grid128):
    return dyadic_partition(grid128)


@pytest.fixture(scope="session")
def part256(grid256):
    return dyadic_partition(grid256)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
