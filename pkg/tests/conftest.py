import numpy as np
import pytest

from illposed.core import svd
from illposed.experiments import desk_deblur


@pytest.fixture(scope="session")
def desk():
    return desk_deblur()


@pytest.fixture(scope="session")
def desk_svd(desk):
    return svd(desk.A)


@pytest.fixture(scope="session")
def l1_instance():
    """30x50 Gaussian system with a 3-sparse truth, shared by the l1 solver tests."""
    rng = np.random.Generator(np.random.Philox(7))
    A = rng.standard_normal((30, 50))
    x = np.zeros(50)
    x[[3, 17, 40]] = [1.5, -2.0, 1.0]
    y = A @ x + 0.01 * rng.standard_normal(30)
    return A, y, x
