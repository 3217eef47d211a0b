import numpy as np
import pytest

from polysel import Dataset, Heredity, ModelSpace


@pytest.fixture(scope="session")
def quad2_shc():
    return ModelSpace.full_surface(2, 2, Heredity.STRONG)


@pytest.fixture(scope="session")
def quad2_whc():
    return ModelSpace.full_surface(2, 2, Heredity.WEAK)


@pytest.fixture(scope="session")
def quad5_shc():
    return ModelSpace.full_surface(5, 2, Heredity.STRONG)


@pytest.fixture(scope="session")
def quad2_data():
    """n=100 draws from y = x1 + 0.7*x2 + 0.4*x1*x2 + noise."""
    rng = np.random.default_rng(20240817)
    X = rng.standard_normal((100, 2))
    y = X[:, 0] + 0.7 * X[:, 1] + 0.4 * X[:, 0] * X[:, 1] + rng.standard_normal(100)
    return Dataset(y, X, ["x1", "x2"])
