"""
Filtering Quality Metrics
Chamfer distance and k-nearest-neighbor mean square error against a reference cloud
"""
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from geometry.cloud import PointCloud
from geometry.errors import EmptyCloudError

MSE_NEIGHBORS = 10

# Scales used when printing values the way published tables do
CHAMFER_SCALE = 1e-5
MSE_SCALE = 1e-3


@dataclass(frozen=True)
class MetricResult:
    """Chamfer distance and MSE, both in squared coordinate units"""
    chamfer: float
    mse: float

    def scaled(self) -> dict:
        """Values in units of 1e-5 (chamfer) and 1e-3 (MSE)"""
        return {'chamfer': self.chamfer / CHAMFER_SCALE, 'mse': self.mse / MSE_SCALE}

    def to_line(self) -> str:
        return f"chamfer={self.chamfer:.10g} mse={self.mse:.10g}"

    def to_dict(self) -> dict:
        return {'chamfer': self.chamfer, 'mse': self.mse}


def _nearest_squared(source: np.ndarray, target: np.ndarray, k: int) -> np.ndarray:
    # Squared distances to the k nearest target points, recomputed from coordinates
    _, idx = cKDTree(target).query(source, k=list(range(1, k + 1)))
    idx = np.asarray(idx).reshape(len(source), k)
    return ((source[:, None, :] - target[idx]) ** 2).sum(axis=-1)


def chamfer(reference: PointCloud, candidate: PointCloud) -> float:
    """
    Symmetric chamfer distance

    Mean squared nearest-neighbor distance from reference to candidate plus
    the same from candidate to reference.
    """
    if len(reference) == 0 or len(candidate) == 0:
        raise EmptyCloudError()
    forward = _nearest_squared(reference.points, candidate.points, 1)[:, 0]
    backward = _nearest_squared(candidate.points, reference.points, 1)[:, 0]
    return float(forward.mean() + backward.mean())


def mse(reference: PointCloud, candidate: PointCloud, k: int = MSE_NEIGHBORS) -> float:
    """
    Mean over reference points of the mean squared distance to their k
    nearest candidate points
    """
    if len(reference) == 0 or len(candidate) == 0:
        raise EmptyCloudError()
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    if len(candidate) < k:
        raise ValueError(f"candidate has {len(candidate)} points, fewer than k={k}")
    return float(_nearest_squared(reference.points, candidate.points, k).mean(axis=1).mean())


def evaluate(reference: PointCloud, candidate: PointCloud, k: int = MSE_NEIGHBORS) -> MetricResult:
    """Both metrics at once"""
    return MetricResult(chamfer=chamfer(reference, candidate), mse=mse(reference, candidate, k))
