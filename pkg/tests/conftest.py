import numpy as np
import pytest

from monge_ampere_lab.core import PointCloud, lower_convex_envelope


@pytest.fixture
def quadratic_grid():
    """|x|^2 / 2 on the 0.25 grid over [-2, 2]^2; every interior atom is exactly h^2."""
    cloud = PointCloud.grid([-2.0, -2.0], [2.0, 2.0], 0.25)
    return lower_convex_envelope(cloud, 0.5 * np.sum(cloud.nodes ** 2, axis=1))


@pytest.fixture
def caffarelli_grid():
    cloud = PointCloud.grid([-2.0, -2.0], [2.0, 2.0], 0.25)
    nodes = cloud.nodes
    return lower_convex_envelope(cloud, 0.5 * np.sum(nodes ** 2, axis=1) + np.abs(nodes[:, 0]))


@pytest.fixture
def cross_cone():
    """|x| + |y| on the five node cross {0, +-e1, +-e2}."""
    nodes = np.array([[0.0, 0.0], [1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
    return lower_convex_envelope(PointCloud.from_points(nodes), np.abs(nodes).sum(axis=1))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
