"""
Filtering Pipeline
Similar-patch finding (step 1) and position update (step 2), iterated under
one of two schemes
"""
from dataclasses import dataclass, field
from enum import IntEnum
from typing import List, Optional, Tuple
import logging
import time

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field

from filtering.alignment import PatchAlignment
from filtering.config import FILTER_DEFAULTS, FILTER_PRESETS, PARAM_RANGES, SCHEME_ADVICE
from filtering.rpca import DescriptorKind, RpcaParams
from filtering.similarity import (
    SearchMode, SimilarSet, build_descriptor_table, calibrate_theta, find_all_similar,
    find_all_similar_local,
)
from geometry.cloud import PointCloud, build_index
from geometry.errors import EmptyCloudError, PatchSizeError
from workers.pool import map_chunks

logger = logging.getLogger(__name__)


class IterationScheme(IntEnum):
    """How similar sets are obtained after the first iteration"""
    REFIND_EACH_ITERATION = 1
    REUSE_FIRST_SEARCH = 2


class FilterParams(BaseModel):
    """Parameters of a filtering run"""
    k: int = Field(FILTER_DEFAULTS['k'], ge=3)
    theta: float = Field(FILTER_DEFAULTS['theta'], gt=0)
    iterations: int = Field(FILTER_DEFAULTS['iterations'], ge=1)
    scheme: IterationScheme = IterationScheme(FILTER_DEFAULTS['scheme'])
    rpca: RpcaParams = Field(default_factory=RpcaParams)
    descriptor: DescriptorKind = DescriptorKind.RPCA
    search: SearchMode = SearchMode.NON_LOCAL
    local_radius_factor: float = Field(FILTER_DEFAULTS['local_radius_factor'], gt=0)
    # When set, theta is recalibrated on every search from the descriptor table
    set_size: Optional[int] = Field(None, ge=1)

    @classmethod
    def from_preset(cls, name: str, **overrides) -> 'FilterParams':
        """Parameters from a named preset, with optional overrides"""
        if name not in FILTER_PRESETS:
            raise ValueError(f"unknown preset '{name}', expected one of {sorted(FILTER_PRESETS)}")
        values = dict(FILTER_PRESETS[name])
        values.update(overrides)
        return cls(**values)

    def range_warnings(self) -> List[str]:
        """Messages for values outside the recommended ranges"""
        warnings = []
        for name, (low, high) in PARAM_RANGES.items():
            value = getattr(self, name)
            if not low <= value <= high:
                warnings.append(f"{name}={value} is outside the recommended range [{low}, {high}]")
        return warnings

    def to_dict(self) -> dict:
        return {
            'k': self.k,
            'theta': self.theta,
            'iterations': self.iterations,
            'scheme': int(self.scheme),
            'descriptor': self.descriptor.value,
            'search': self.search.value,
            'local_radius_factor': self.local_radius_factor,
            'set_size': self.set_size,
            'rpca': self.rpca.to_dict(),
        }


@dataclass
class IterationTiming:
    """Wall time of one pass, split by step"""
    iteration: int
    step1_seconds: float
    step2_seconds: float
    searched: bool

    @property
    def subtotal(self) -> float:
        return self.step1_seconds + self.step2_seconds


@dataclass
class FilterReport:
    """Per-iteration timings and similar-set sizes of a run"""
    scheme: int
    timings: List[IterationTiming] = field(default_factory=list)
    similar_sizes: Optional[np.ndarray] = None

    @property
    def step1_total(self) -> float:
        return sum(t.step1_seconds for t in self.timings)

    @property
    def step2_total(self) -> float:
        return sum(t.step2_seconds for t in self.timings)

    @property
    def total(self) -> float:
        return self.step1_total + self.step2_total

    def size_summary(self) -> dict:
        """Min / median / max similar-set size"""
        if self.similar_sizes is None or len(self.similar_sizes) == 0:
            return {'min': 0, 'median': 0, 'max': 0}
        sizes = self.similar_sizes
        return {'min': int(sizes.min()), 'median': float(np.median(sizes)), 'max': int(sizes.max())}

    def to_frame(self) -> pd.DataFrame:
        """One row per iteration"""
        return pd.DataFrame(
            [{
                'iteration': t.iteration,
                'step1': t.step1_seconds,
                'step2': t.step2_seconds,
                'subtotal': t.subtotal,
                'searched': t.searched,
            } for t in self.timings],
            columns=['iteration', 'step1', 'step2', 'subtotal', 'searched'],
        )

    def to_lines(self) -> List[str]:
        """Line-oriented key=value rendering"""
        lines = [f"scheme={self.scheme} iterations={len(self.timings)}"]
        for t in self.timings:
            lines.append(
                f"iteration={t.iteration} step1={t.step1_seconds:.6f} "
                f"step2={t.step2_seconds:.6f} subtotal={t.subtotal:.6f}"
            )
        lines.append(
            f"total step1={self.step1_total:.6f} step2={self.step2_total:.6f} total={self.total:.6f}"
        )
        summary = self.size_summary()
        lines.append(
            f"similar_sizes min={summary['min']} median={summary['median']:g} max={summary['max']}"
        )
        return lines

    def to_dict(self) -> dict:
        return {
            'scheme': self.scheme,
            'timings': self.to_frame().to_dict(orient='records'),
            'similar_sizes': self.size_summary(),
        }


def find_similar_sets(cloud: PointCloud, params: FilterParams, index=None,
                      neighbors: np.ndarray = None) -> List[SimilarSet]:
    """Step 1: similar set of every point of the cloud"""
    index = index if index is not None else build_index(cloud)
    if neighbors is None:
        neighbors = index.query_all(params.k)
    table = build_descriptor_table(cloud, params.k, params.rpca, index,
                                   params.descriptor, neighbors)
    theta = params.theta if params.set_size is None else calibrate_theta(table, params.set_size)
    if params.search == SearchMode.LOCAL:
        return find_all_similar_local(table, theta, cloud, index, params.local_radius_factor)
    return find_all_similar(table, theta)


def filter_pass(cloud: PointCloud, params: FilterParams,
                cached: Optional[List[SimilarSet]] = None,
                iteration: int = 1) -> Tuple[PointCloud, List[SimilarSet], IterationTiming]:
    """
    One filtering pass

    Without `cached` the similar sets are searched on this cloud (step 1);
    with it they are reused. Step 2 always recomputes patches, frames and
    canonical data on the current cloud and updates every point from the
    same input snapshot.

    Args:
        cloud: Input cloud
        params: Filter parameters
        cached: Similar sets from an earlier pass
        iteration: Iteration number for the report

    Returns:
        tuple: (filtered cloud, similar sets used, timing)
    """
    n = len(cloud)
    if n == 0:
        raise EmptyCloudError()
    if params.k > n:
        raise PatchSizeError(params.k, n)
    if cached is not None and len(cached) != n:
        raise ValueError(f"cached similar sets cover {len(cached)} points, cloud has {n}")

    started = time.perf_counter()
    index = build_index(cloud)
    neighbors = index.query_all(params.k)

    step1 = 0.0
    if cached is None:
        sets = find_similar_sets(cloud, params, index, neighbors)
        step1 = time.perf_counter() - started
        started = time.perf_counter()
    else:
        sets = cached

    alignment = PatchAlignment.from_cloud(cloud, neighbors)

    def update(chunk: range) -> np.ndarray:
        return np.array([alignment.update(i, sets[i].member_indices) for i in chunk]).reshape(-1, 3)

    new_points = np.concatenate(map_chunks(update, n))
    step2 = time.perf_counter() - started

    timing = IterationTiming(iteration, step1, step2, cached is None)
    logger.info("Pass %d: step 1 %.3fs, step 2 %.3fs%s", iteration, step1, step2,
                "" if cached is None else " (similar sets reused)")
    return PointCloud(new_points), sets, timing


def filter_cloud(cloud: PointCloud, params: FilterParams) -> Tuple[PointCloud, FilterReport]:
    """
    Filter a cloud for params.iterations passes

    Scheme 1 searches similar sets in every pass; scheme 2 searches once
    and reuses the first pass's sets afterwards.

    Args:
        cloud: Noisy cloud
        params: Filter parameters

    Returns:
        tuple: (filtered cloud, report)
    """
    for message in params.range_warnings():
        logger.warning(message)

    report = FilterReport(scheme=int(params.scheme))
    reuse = params.scheme == IterationScheme.REUSE_FIRST_SEARCH
    sets = None
    current = cloud

    for iteration in range(1, params.iterations + 1):
        cached = sets if reuse else None
        current, used, timing = filter_pass(current, params, cached, iteration)
        if cached is None:
            sets = used
            report.similar_sizes = np.array([len(s) for s in used])
        report.timings.append(timing)

    return current, report


def subsample(cloud: PointCloud, fraction: float, seed: int = 0) -> Tuple[PointCloud, np.ndarray]:
    """
    Uniform random selection without replacement

    Returns:
        tuple: (selected cloud, sorted indices of the selected points)
    """
    if not 0 < fraction <= 1:
        raise ValueError(f"fraction must be in (0, 1], got {fraction}")
    n = len(cloud)
    if fraction == 1 or n == 0:
        return PointCloud(cloud.points), np.arange(n)

    count = max(1, int(round(fraction * n)))
    rng = np.random.default_rng(seed)
    chosen = np.sort(rng.choice(n, size=count, replace=False))
    return PointCloud(cloud.points[chosen]), chosen


def filter_sampled(cloud: PointCloud, params: FilterParams, fraction: float,
                   seed: int = 0) -> Tuple[PointCloud, FilterReport]:
    """Filter a random fraction of the points; the rest pass through unchanged"""
    selected, index_map = subsample(cloud, fraction, seed)
    filtered, report = filter_cloud(selected, params)
    points = cloud.points.copy()
    points[index_map] = filtered.points
    logger.info("Filtered %d of %d points", len(index_map), len(cloud))
    return PointCloud(points), report


def scheme_advice(large_noise: Optional[bool] = None) -> str:
    """Which iteration scheme suits a cloud; both rules when the noise level is unknown"""
    if large_noise is None:
        return f"{SCHEME_ADVICE[1]} {SCHEME_ADVICE[2]}"
    return SCHEME_ADVICE[1] if large_noise else SCHEME_ADVICE[2]
