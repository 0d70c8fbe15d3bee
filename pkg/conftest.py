"""
Shared fixtures for the test suites
"""
import os
import sys

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from geometry.cloud import PointCloud, add_gaussian_noise
from geometry.synthetic import sample_plane

settings.register_profile('default', deadline=None, max_examples=25)
settings.load_profile('default')


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def random_cloud(rng):
    return PointCloud(rng.random((200, 3)))


@pytest.fixture
def clean_plane():
    return sample_plane(2000, seed=3)


@pytest.fixture
def noisy_plane(clean_plane):
    return add_gaussian_noise(clean_plane, 0.01, seed=4)


@pytest.fixture
def rotate_z90():
    """Exact 90 degree rotation about z"""
    return lambda points: np.column_stack([-points[:, 1], points[:, 0], points[:, 2]])


@pytest.fixture
def random_rotation():
    return _random_rotation


def _random_rotation(rng) -> np.ndarray:
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 2] *= -1
    return q
