"""
Canonical Alignment and Position Update
Maps similar patches into their eigen frames, resolves axis flips by quadrant
sub-patch PCA and averages the aligned central points
"""
from dataclasses import dataclass
from itertools import product
from typing import List, Optional
import logging

import numpy as np

from geometry.cloud import NeighborIndex, Patch, PointCloud, extract_patch, patch_matrices

logger = logging.getLogger(__name__)

# The 8 axis flips in tie-break order: (+1, +1, +1) first, then lexicographic with +1 < -1
FLIP_SIGNS = np.array(list(product((1.0, -1.0), repeat=3)))
# Quadrant bits toggled by each flip (bit 0: x, bit 1: y, bit 2: z)
FLIP_BITS = ((FLIP_SIGNS < 0) * np.array([1, 2, 4])).sum(axis=1)
# Flipped patch's quadrant q holds the flipped points of original quadrant q ^ bits
FLIP_QUADRANTS = np.array([[q ^ b for q in range(8)] for b in FLIP_BITS])

SIGMA_TIE_TOL = 1e-12
MIN_SUB_PATCH_POINTS = 3


@dataclass(frozen=True)
class EigenFrame:
    """Orthogonal map into a patch's principal axes"""
    forward: np.ndarray
    centroid: np.ndarray

    @property
    def inverse(self) -> np.ndarray:
        return self.forward.T


@dataclass(frozen=True)
class CanonicalPatch:
    """Patch coordinates in canonical space plus its central point"""
    matrix: np.ndarray
    source_center_canonical: np.ndarray

    def flipped(self, signs) -> 'CanonicalPatch':
        signs = np.asarray(signs, dtype=np.float64)
        return CanonicalPatch(self.matrix * signs[:, None], self.source_center_canonical * signs)


@dataclass(frozen=True)
class FlipVariant:
    """One of the 8 axis flips of a canonical patch"""
    flip_signs: tuple
    patch: CanonicalPatch

    @property
    def matrix(self) -> np.ndarray:
        return self.patch.matrix


@dataclass(frozen=True)
class RegularizedSet:
    """Canonical central points of all aligned similar patches"""
    centers: np.ndarray

    def __len__(self) -> int:
        return self.centers.shape[0]

    def mean(self) -> np.ndarray:
        return self.centers.mean(axis=0)


def eigen_frames(matrices: np.ndarray) -> np.ndarray:
    """
    Forward maps for a stack of centered patch matrices

    Rows are eigenvectors of M M^T by nonincreasing eigenvalue. Each row's
    largest-magnitude component is made positive (first index on ties), then
    the last row is negated if needed so that det F = +1.

    Args:
        matrices: (n, 3, K) centered patches

    Returns:
        np.ndarray: (n, 3, 3) orthogonal matrices
    """
    m = np.asarray(matrices, dtype=np.float64)
    gram = m @ np.swapaxes(m, -1, -2)
    _, vectors = np.linalg.eigh(gram)
    frames = np.swapaxes(vectors[..., ::-1], -1, -2).copy()

    pivot = np.argmax(np.abs(frames), axis=-1)
    signs = np.sign(np.take_along_axis(frames, pivot[..., None], axis=-1))
    signs[signs == 0] = 1.0
    frames *= signs

    flip_last = np.linalg.det(frames) < 0
    frames[flip_last, 2, :] *= -1.0
    return frames


def eigen_frame(patch: Patch) -> EigenFrame:
    """Eigen frame of one patch"""
    forward = eigen_frames(patch.matrix[None])[0]
    return EigenFrame(forward=forward, centroid=np.asarray(patch.centroid, dtype=np.float64))


def map_to_canonical(frame: EigenFrame, patch: Patch) -> CanonicalPatch:
    """Apply F to the centered patch and to its central point"""
    return CanonicalPatch(
        matrix=frame.forward @ patch.matrix,
        source_center_canonical=frame.forward @ (np.asarray(patch.center) - patch.centroid),
    )


def map_from_canonical(frame: EigenFrame, point: np.ndarray) -> np.ndarray:
    """Bring a canonical-space position back to the original space"""
    return frame.inverse @ np.asarray(point, dtype=np.float64) + frame.centroid


def quadrant_labels(matrix: np.ndarray) -> np.ndarray:
    """Zero-based quadrant per column: (x<0) + 2(y<0) + 4(z<0); zero counts as positive"""
    negative = np.asarray(matrix) < 0
    return negative[..., 0, :] * 1 + negative[..., 1, :] * 2 + negative[..., 2, :] * 4


def quadrant_split(c: CanonicalPatch) -> List[np.ndarray]:
    """
    Partition a canonical patch into its 8 quadrant sub-patches

    Returns:
        list: Eight 3xn_j matrices; entry j-1 holds quadrant j
    """
    labels = quadrant_labels(c.matrix)
    return [c.matrix[:, labels == q] for q in range(8)]


def sub_axis(sub: np.ndarray) -> Optional[np.ndarray]:
    """Dominant unit eigenvector of a sub-patch's covariance, None below 3 points"""
    sub = np.asarray(sub, dtype=np.float64)
    if sub.ndim != 2 or sub.shape[1] < MIN_SUB_PATCH_POINTS:
        return None
    centered = sub - sub.mean(axis=1, keepdims=True)
    _, vectors = np.linalg.eigh(centered @ centered.T)
    return vectors[:, -1]


def _axis_term(a: Optional[np.ndarray], b: Optional[np.ndarray]) -> float:
    if a is None or b is None:
        return 0.0
    return float(min(np.linalg.norm(a - b), np.linalg.norm(a + b)))


def alignment_offset(candidate, reference: CanonicalPatch) -> float:
    """
    Sign-insensitive mismatch of quadrant sub-axes between two canonical patches

    Quadrants where either sub-axis is missing contribute nothing.
    """
    patch = candidate.patch if isinstance(candidate, FlipVariant) else candidate
    cand_axes = [sub_axis(s) for s in quadrant_split(patch)]
    ref_axes = [sub_axis(s) for s in quadrant_split(reference)]
    return sum(_axis_term(a, b) for a, b in zip(cand_axes, ref_axes))


def flip_variants(c: CanonicalPatch) -> List[FlipVariant]:
    """The 8 flips of a canonical patch, identity first"""
    return [FlipVariant(tuple(int(s) for s in signs), c.flipped(signs)) for signs in FLIP_SIGNS]


def _first_minimum(sigma: np.ndarray) -> np.ndarray:
    sigma = np.asarray(sigma)
    lowest = sigma.min(axis=-1, keepdims=True)
    return np.argmax(sigma <= lowest + SIGMA_TIE_TOL, axis=-1)


def best_flip(o: CanonicalPatch, reference: CanonicalPatch) -> CanonicalPatch:
    """Flip of `o` with the smallest alignment offset to `reference`"""
    variants = flip_variants(o)
    ref_axes = [sub_axis(s) for s in quadrant_split(reference)]
    sigma = []
    for variant in variants:
        cand_axes = [sub_axis(s) for s in quadrant_split(variant.patch)]
        sigma.append(sum(_axis_term(a, b) for a, b in zip(cand_axes, ref_axes)))
    return variants[int(_first_minimum(np.array(sigma)))].patch


def update_center(query: Patch, frame: EigenFrame, similar, cloud: PointCloud,
                  k: int, idx: NeighborIndex) -> np.ndarray:
    """
    New position of a query point from its similar patches

    Each member patch is mapped by its own eigen frame, flipped to best match
    the query's canonical patch, and contributes its canonical central point to
    the average; the average is mapped back with the query's inverse frame.

    Args:
        query: Query patch
        frame: Eigen frame of the query patch
        similar: SimilarSet of the query
        cloud: Cloud the patches are taken from
        k: Patch size
        idx: Neighbor index over `cloud`

    Returns:
        np.ndarray: Updated 3D position
    """
    reference = map_to_canonical(frame, query)
    centers = []
    for j in similar.member_indices:
        if j == query.center_index:
            member, member_frame = query, frame
        else:
            member = extract_patch(cloud, int(j), k, idx)
            member_frame = eigen_frame(member)
        aligned = best_flip(map_to_canonical(member_frame, member), reference)
        centers.append(aligned.source_center_canonical)
    regularized = RegularizedSet(np.array(centers))
    return map_from_canonical(frame, regularized.mean())


def _quadrant_axes(canonical: np.ndarray) -> np.ndarray:
    # (n, 3, K) -> (n, 8, 3) dominant sub-patch axes, NaN where absent
    n = canonical.shape[0]
    labels = quadrant_labels(canonical)
    axes = np.full((n, 8, 3), np.nan)
    for q in range(8):
        mask = labels == q
        counts = mask.sum(axis=1)
        ok = counts >= MIN_SUB_PATCH_POINTS
        if not ok.any():
            continue
        pts = canonical[ok]
        weights = mask[ok][:, None, :]
        means = (pts * weights).sum(axis=-1) / counts[ok][:, None]
        centered = (pts - means[..., None]) * weights
        _, vectors = np.linalg.eigh(centered @ np.swapaxes(centered, 1, 2))
        axes[ok, q] = vectors[..., -1]
    return axes


class PatchAlignment:
    """
    Canonical data of every patch of one cloud, computed once per pass

    Flipping axes relabels quadrants and negates the matching sub-axis
    components, so the 8 flips of every member are scored from the
    unflipped sub-axes without re-splitting any patch.
    """

    def __init__(self, points: np.ndarray, neighbors: np.ndarray):
        matrices, centroids = patch_matrices(points, neighbors)
        self.frames = eigen_frames(matrices)
        self.centroids = centroids
        canonical = self.frames @ matrices
        self.centers = np.einsum('nij,nj->ni', self.frames, points - centroids)
        self.axes = _quadrant_axes(canonical)
        self.present = ~np.isnan(self.axes[..., 0])

    @classmethod
    def from_cloud(cls, cloud: PointCloud, neighbors: np.ndarray) -> 'PatchAlignment':
        return cls(cloud.points, neighbors)

    def __len__(self) -> int:
        return self.frames.shape[0]

    def flip_offsets(self, query: int, members: np.ndarray) -> np.ndarray:
        """(m, 8) alignment offsets of every flip of every member against the query"""
        members = np.asarray(members, dtype=np.intp)
        ref = np.nan_to_num(self.axes[query])[None, None, :, :]
        present = self.present[members][:, FLIP_QUADRANTS] & self.present[query][None, None, :]

        cand = np.nan_to_num(self.axes[members])[:, FLIP_QUADRANTS, :] * FLIP_SIGNS[None, :, None, :]
        terms = np.minimum(np.linalg.norm(cand - ref, axis=-1), np.linalg.norm(cand + ref, axis=-1))
        return np.where(present, terms, 0.0).sum(axis=-1)

    def best_flips(self, query: int, members: np.ndarray) -> np.ndarray:
        """Index into FLIP_SIGNS of the chosen flip per member"""
        flips = _first_minimum(self.flip_offsets(query, members))
        members = np.asarray(members)
        flips[members == query] = 0
        return flips

    def update(self, query: int, members: np.ndarray) -> np.ndarray:
        """Updated position of point `query` given its similar members"""
        members = np.asarray(members, dtype=np.intp)
        flips = self.best_flips(query, members)
        aligned = self.centers[members] * FLIP_SIGNS[flips]
        return self.frames[query].T @ aligned.mean(axis=0) + self.centroids[query]
