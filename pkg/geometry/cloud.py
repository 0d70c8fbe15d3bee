"""
Point-Cloud Storage and Neighborhoods
Clouds, k-nearest-neighbor indexing, patch extraction and synthetic noise
"""
from dataclasses import dataclass
from typing import Optional, Tuple
import logging

import numpy as np
from scipy.spatial import cKDTree

from geometry.errors import EmptyCloudError, NonFiniteError, PatchSizeError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PointCloud:
    """Ordered set of 3D positions stored as an immutable (N, 3) float64 array"""

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64, copy=True)
        if pts.size == 0:
            pts = pts.reshape(0, 3)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValueError(f"points must have shape (N, 3), got {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise NonFiniteError("cloud contains non-finite coordinates")
        pts.setflags(write=False)
        object.__setattr__(self, 'points', pts)

    def __len__(self) -> int:
        return self.points.shape[0]

    def to_dict(self) -> dict:
        """Summary of the cloud"""
        return {
            'count': len(self),
            'bounding_box_diagonal': bounding_box_diagonal(self) if len(self) else 0.0,
        }


@dataclass(frozen=True)
class Patch:
    """A center point and its K nearest neighbors as a centered 3xK matrix"""

    center_index: int
    neighbor_indices: np.ndarray
    centroid: np.ndarray
    matrix: np.ndarray
    center: np.ndarray

    @property
    def k(self) -> int:
        return self.matrix.shape[1]


class NeighborIndex:
    """
    K-nearest-neighbor index over a cloud

    Results are ordered by nondecreasing Euclidean distance; equal distances
    are ordered by point index.
    """

    def __init__(self, cloud: PointCloud):
        if len(cloud) == 0:
            raise EmptyCloudError()
        self.cloud = cloud
        self.points = cloud.points
        self.tree = cKDTree(self.points)

    def __len__(self) -> int:
        return self.points.shape[0]

    def query(self, point, k: int) -> np.ndarray:
        """
        Indices of the k points nearest to `point`

        Args:
            point: 3D query position
            k: Number of neighbors

        Returns:
            np.ndarray: k indices sorted by distance, ties by index
        """
        return self._knn(np.asarray(point, dtype=np.float64).reshape(1, 3), k)[0]

    def query_all(self, k: int) -> np.ndarray:
        """
        Neighbor rows for every point of the indexed cloud

        Each row i contains i itself, even when duplicated points would
        otherwise push it out of the first k.
        """
        neighbors = self._knn(self.points, k)
        rows = np.arange(len(self))
        missing = ~np.any(neighbors == rows[:, None], axis=1)
        if missing.any():
            logger.debug("Re-inserting %d centers displaced by duplicates", missing.sum())
            neighbors[missing, 1:] = neighbors[missing, :-1]
            neighbors[missing, 0] = rows[missing]
        return neighbors

    def query_ball(self, point, radius: float) -> np.ndarray:
        """Indices of the points within `radius` of `point`, ascending"""
        found = self.tree.query_ball_point(np.asarray(point, dtype=np.float64), r=radius)
        return np.array(sorted(found), dtype=np.intp)

    def _knn(self, queries: np.ndarray, k: int) -> np.ndarray:
        n = len(self)
        if k < 1:
            raise ValueError(f"k must be at least 1, got {k}")
        if k > n:
            raise PatchSizeError(k, n)

        # One spare candidate so ties at the k-th distance can be detected
        kq = min(k + 1, n)
        _, idx = self.tree.query(queries, k=list(range(1, kq + 1)))
        idx = np.asarray(idx, dtype=np.intp).reshape(len(queries), kq)
        dist = np.linalg.norm(queries[:, None, :] - self.points[idx], axis=-1)
        order = np.lexsort((idx, dist), axis=-1)
        idx = np.take_along_axis(idx, order, axis=-1)
        dist = np.take_along_axis(dist, order, axis=-1)

        result = idx[:, :k].copy()
        if kq > k:
            tied = np.flatnonzero(dist[:, k] <= dist[:, k - 1])
            for row in tied:
                result[row] = self._knn_exact(queries[row], k, dist[row, k - 1])
        return result

    def _knn_exact(self, point: np.ndarray, k: int, radius: float) -> np.ndarray:
        candidates = np.asarray(
            self.tree.query_ball_point(point, r=radius * (1 + 1e-9) + 1e-300), dtype=np.intp
        )
        dist = np.linalg.norm(self.points[candidates] - point, axis=1)
        order = np.lexsort((candidates, dist))
        return candidates[order[:k]]


def build_index(cloud: PointCloud) -> NeighborIndex:
    """Build the neighbor index of a non-empty cloud"""
    return NeighborIndex(cloud)


def patch_matrices(points: np.ndarray, neighbors: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Centered patch matrices for many patches at once

    Args:
        points: (N, 3) cloud coordinates
        neighbors: (M, K) neighbor rows

    Returns:
        tuple: (M, 3, K) centered matrices and (M, 3) centroids
    """
    gathered = points[neighbors]
    centroids = gathered.mean(axis=1)
    matrices = np.swapaxes(gathered - centroids[:, None, :], 1, 2)
    return np.ascontiguousarray(matrices), centroids


def extract_patch(cloud: PointCloud, index: int, k: int,
                  idx: Optional[NeighborIndex] = None) -> Patch:
    """
    Extract the patch made of point `index` and its k nearest neighbors

    Args:
        cloud: Source cloud
        index: Center point index
        k: Patch size (center included)
        idx: Neighbor index over `cloud`; built on demand when omitted

    Returns:
        Patch: Columns ordered by distance from the center
    """
    n = len(cloud)
    if n == 0:
        raise EmptyCloudError()
    if k > n:
        raise PatchSizeError(k, n)
    if not 0 <= index < n:
        raise IndexError(f"point index {index} out of range for {n} points")

    idx = idx if idx is not None else build_index(cloud)
    neighbors = idx.query(cloud.points[index], k)
    if index not in neighbors:
        neighbors = np.concatenate(([index], neighbors[:-1]))

    matrices, centroids = patch_matrices(cloud.points, neighbors[None, :])
    return Patch(
        center_index=int(index),
        neighbor_indices=neighbors,
        centroid=centroids[0],
        matrix=matrices[0],
        center=cloud.points[index].copy(),
    )


def bounding_box_diagonal(cloud: PointCloud) -> float:
    """Length of the diagonal of the axis-aligned bounding box"""
    if len(cloud) == 0:
        raise EmptyCloudError()
    extent = cloud.points.max(axis=0) - cloud.points.min(axis=0)
    return float(np.linalg.norm(extent))


def add_gaussian_noise(cloud: PointCloud, sigma_fraction: float, seed: int) -> PointCloud:
    """
    Perturb every coordinate with zero-mean Gaussian noise

    Args:
        cloud: Clean cloud
        sigma_fraction: Standard deviation as a fraction of the bounding-box diagonal
        seed: Random seed; equal seeds give bitwise-equal output

    Returns:
        PointCloud: Noisy copy
    """
    if sigma_fraction < 0:
        raise ValueError(f"sigma_fraction must be non-negative, got {sigma_fraction}")
    if sigma_fraction == 0 or len(cloud) == 0:
        return PointCloud(cloud.points)

    sigma = sigma_fraction * bounding_box_diagonal(cloud)
    rng = np.random.default_rng(seed)
    return PointCloud(cloud.points + rng.normal(0.0, sigma, size=cloud.points.shape))


def normalize(cloud: PointCloud) -> Tuple[PointCloud, np.ndarray, float]:
    """
    Rescale a cloud to unit bounding-box diagonal about the box center

    Returns:
        tuple: (scaled cloud, box center, scale factor)
    """
    if len(cloud) == 0:
        raise EmptyCloudError()
    center = (cloud.points.max(axis=0) + cloud.points.min(axis=0)) / 2.0
    diagonal = bounding_box_diagonal(cloud)
    scale = diagonal if diagonal > 0 else 1.0
    return PointCloud((cloud.points - center) / scale), center, scale


def denormalize(cloud: PointCloud, center: np.ndarray, scale: float) -> PointCloud:
    """Undo `normalize`"""
    return PointCloud(cloud.points * scale + center)
