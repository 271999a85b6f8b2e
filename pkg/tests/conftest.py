import numpy as np
import pytest

from lidar_deploy.geometry import LidarModel


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def coarse_model():
    """Small sensor for brute-force comparisons: 8 beams, 1 degree azimuth steps."""
    return LidarModel("coarse", tuple(np.linspace(-15, 5, 8)), 1.0, max_range=60.0, min_range=0.3)
