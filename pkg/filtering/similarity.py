"""
Similar Patch Finding
Non-local search for patches whose descriptors lie within a threshold
"""
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional
import logging

import numpy as np
from scipy.spatial import cKDTree

from filtering.rpca import (
    Descriptor, DescriptorKind, RpcaParams, covariance_eigenvalues,
    decompose_batch, singular_values,
)
from geometry.cloud import NeighborIndex, PointCloud, build_index, patch_matrices
from geometry.errors import PatchSizeError
from workers.pool import map_chunks

logger = logging.getLogger(__name__)


class SearchMode(str, Enum):
    """Where candidate patches come from"""
    NON_LOCAL = 'non_local'
    LOCAL = 'local'


@dataclass(frozen=True)
class SimilarSet:
    """Indices of the patches similar to a query patch (query included)"""
    query_index: int
    member_indices: np.ndarray

    def __len__(self) -> int:
        return len(self.member_indices)

    def __contains__(self, index) -> bool:
        return bool(np.any(self.member_indices == index))

    def to_dict(self) -> dict:
        return {
            'query_index': self.query_index,
            'size': len(self),
            'member_indices': self.member_indices.tolist(),
        }


class DescriptorTable:
    """Per-point descriptors of one cloud, built once per filtering pass"""

    def __init__(self, values: np.ndarray, k: int,
                 kind: DescriptorKind = DescriptorKind.RPCA, converged: np.ndarray = None):
        values = np.array(values, dtype=np.float64).reshape(-1, 3)
        values.setflags(write=False)
        self.values = values
        self.k = k
        self.kind = DescriptorKind(kind)
        self.converged = converged
        # Read-only once built; worker threads share it
        self.tree = cKDTree(values)

    def __len__(self) -> int:
        return self.values.shape[0]

    def __getitem__(self, i: int) -> Descriptor:
        return Descriptor(self.values[i])


def patch_distance(v: Descriptor, v2: Descriptor) -> float:
    """Euclidean distance between two descriptors"""
    a = v.as_array() if isinstance(v, Descriptor) else np.asarray(v, dtype=np.float64)
    b = v2.as_array() if isinstance(v2, Descriptor) else np.asarray(v2, dtype=np.float64)
    return float(np.linalg.norm(a - b))


def is_similar(d: float, theta: float) -> bool:
    """Two patches are similar when their distance is strictly below theta"""
    if not theta > 0:
        raise ValueError(f"theta must be positive, got {theta}")
    return bool(d < theta)


def build_descriptor_table(cloud: PointCloud, k: int, rpca: RpcaParams = None,
                           index: Optional[NeighborIndex] = None,
                           kind: DescriptorKind = DescriptorKind.RPCA,
                           neighbors: np.ndarray = None) -> DescriptorTable:
    """
    Descriptor of every patch of the cloud

    Args:
        cloud: Input cloud
        k: Patch size
        rpca: Solver parameters
        index: Neighbor index over `cloud` (built when omitted)
        kind: Descriptor variant
        neighbors: Precomputed (N, k) neighbor rows

    Returns:
        DescriptorTable: One descriptor per point
    """
    n = len(cloud)
    if k > n:
        raise PatchSizeError(k, n)
    if neighbors is None:
        index = index if index is not None else build_index(cloud)
        neighbors = index.query_all(k)
    matrices, _ = patch_matrices(cloud.points, neighbors)
    kind = DescriptorKind(kind)

    if kind == DescriptorKind.COVARIANCE:
        return DescriptorTable(covariance_eigenvalues(matrices), k, kind)

    rpca = rpca or RpcaParams()

    def describe(chunk: range):
        batch = decompose_batch(matrices[chunk.start:chunk.stop], rpca)
        return singular_values(batch.low_rank), batch.converged

    results = map_chunks(describe, n)
    values = np.concatenate([r[0] for r in results]) if results else np.empty((0, 3))
    converged = np.concatenate([r[1] for r in results]) if results else np.empty(0, bool)
    logger.debug("Descriptor table built for %d patches (K=%d)", n, k)
    return DescriptorTable(values, k, kind, converged)


def _strict_members(table: DescriptorTable, query_index: int,
                    candidates: np.ndarray, theta: float) -> np.ndarray:
    candidates = np.asarray(candidates, dtype=np.intp)
    d = np.linalg.norm(table.values[candidates] - table.values[query_index], axis=1)
    members = np.sort(candidates[d < theta])
    if not np.any(members == query_index):
        members = np.sort(np.append(members, query_index))
    return members


def _search_radius(theta: float) -> float:
    # Slightly widened so the strict test above decides the boundary
    return theta * (1.0 + 1e-9) + 1e-300


def find_similar(query_index: int, table: DescriptorTable, theta: float) -> SimilarSet:
    """
    All patches whose descriptor lies strictly within theta of the query's

    Args:
        query_index: Query point index
        table: Descriptor table of the cloud
        theta: Similarity threshold (descriptor units)

    Returns:
        SimilarSet: Sorted member indices, query included
    """
    if not theta > 0:
        raise ValueError(f"theta must be positive, got {theta}")
    if not np.isfinite(theta):
        return SimilarSet(int(query_index), np.arange(len(table), dtype=np.intp))
    candidates = table.tree.query_ball_point(table.values[query_index], r=_search_radius(theta))
    return SimilarSet(int(query_index), _strict_members(table, query_index, candidates, theta))


def find_all_similar(table: DescriptorTable, theta: float) -> List[SimilarSet]:
    """Similar sets for every point of the table"""
    if not theta > 0:
        raise ValueError(f"theta must be positive, got {theta}")
    n = len(table)
    if not np.isfinite(theta):
        everyone = np.arange(n, dtype=np.intp)
        return [SimilarSet(i, everyone) for i in range(n)]

    def search(chunk: range):
        hits = table.tree.query_ball_point(table.values[chunk.start:chunk.stop],
                                           r=_search_radius(theta))
        return [SimilarSet(i, _strict_members(table, i, found, theta))
                for i, found in zip(chunk, hits)]

    sets = [s for part in map_chunks(search, n) for s in part]
    if sets:
        sizes = np.array([len(s) for s in sets])
        logger.info("Similar sets: min %d, median %d, max %d members",
                    sizes.min(), int(np.median(sizes)), sizes.max())
    return sets


def calibrate_theta(table: DescriptorTable, set_size: int) -> float:
    """
    Threshold at which the median similar set holds about set_size patches

    Descriptors scale with the patch extent, so a fixed theta means
    different things on differently sampled clouds. This reads the scale
    off the table: theta is the median distance from each descriptor to
    its set_size-th nearest descriptor (itself counted first).

    Args:
        table: Descriptor table of the cloud
        set_size: Wanted median similar-set size, query included

    Returns:
        float: Positive threshold
    """
    if set_size < 1:
        raise ValueError(f"set_size must be at least 1, got {set_size}")
    n = len(table)
    if n == 0:
        raise ValueError("cannot calibrate theta on an empty table")
    count = min(set_size, n)
    distances, _ = table.tree.query(table.values, k=count)
    distances = np.asarray(distances, dtype=np.float64).reshape(n, count)[:, -1]
    # Strict test: nudge up so the median point keeps its set_size-th member
    theta = float(np.nextafter(np.median(distances), np.inf))
    logger.info("Calibrated theta=%.6g for a median similar set of %d", theta, count)
    return theta


def patch_radius(cloud: PointCloud, query_index: int, k: int, index: NeighborIndex) -> float:
    """Distance from a point to the farthest member of its patch"""
    neighbors = index.query(cloud.points[query_index], k)
    return float(np.max(np.linalg.norm(cloud.points[neighbors] - cloud.points[query_index], axis=1)))


def find_similar_local(query_index: int, table: DescriptorTable, theta: float,
                       cloud: PointCloud, index: NeighborIndex,
                       radius_factor: float = 3.0) -> SimilarSet:
    """
    Similar patches restricted to a ball around the query point

    The ball radius is radius_factor times the query's patch radius, so the
    result is always a subset of find_similar's.
    """
    if not theta > 0:
        raise ValueError(f"theta must be positive, got {theta}")
    radius = radius_factor * patch_radius(cloud, query_index, table.k, index)
    candidates = index.query_ball(cloud.points[query_index], radius)
    if np.isfinite(theta):
        return SimilarSet(int(query_index), _strict_members(table, query_index, candidates, theta))
    return SimilarSet(int(query_index), candidates)


def find_all_similar_local(table: DescriptorTable, theta: float, cloud: PointCloud,
                           index: NeighborIndex, radius_factor: float = 3.0) -> List[SimilarSet]:
    """Local similar sets for every point"""
    def search(chunk: range):
        return [find_similar_local(i, table, theta, cloud, index, radius_factor) for i in chunk]

    return [s for part in map_chunks(search, len(table)) for s in part]
