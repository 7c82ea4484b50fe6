import numpy as np
import pytest
from hypothesis import settings

from gwbary import DiscreteMeasure, GroundMetric, GWParams

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

EUCLID = GroundMetric.euclidean()


def random_measure(rng, max_points=6, dim=2, mass_high=2.0, grid=None, min_points=1):
    n = int(rng.integers(min_points, max_points + 1))
    pts = rng.normal(size=(n, dim))
    if grid is None:
        masses = rng.uniform(0.0, mass_high, n)
    else:
        masses = rng.integers(0, int(round(mass_high / grid)) + 1, n) * grid
    return DiscreteMeasure(pts, masses)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def example_pair():
    """Unit mass and triple mass on the same point."""
    return DiscreteMeasure([[0.0]], [1.0]), DiscreteMeasure([[0.0]], [3.0])


@pytest.fixture
def unit_params():
    return GWParams(1.0, 1.0, 2.0)
