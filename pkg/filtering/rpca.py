"""
Robust PCA Decomposition
Low-rank + sparse splitting of patch matrices by the augmented Lagrange multiplier method
"""
from dataclasses import dataclass
from enum import Enum
from typing import Optional
import logging

import numpy as np
from pydantic import BaseModel, Field

from filtering.config import RPCA_DEFAULTS
from geometry.errors import NonFiniteError

logger = logging.getLogger(__name__)


class DescriptorKind(str, Enum):
    """Which patch signature drives the similarity search"""
    RPCA = 'rpca'
    COVARIANCE = 'covariance'


class RpcaParams(BaseModel):
    """Solver parameters; None picks the standard value for the matrix at hand"""
    lmbda: Optional[float] = Field(None, gt=0)
    mu: Optional[float] = Field(None, gt=0)
    tol: float = Field(RPCA_DEFAULTS['tol'], gt=0)
    max_iter: int = Field(RPCA_DEFAULTS['max_iter'], ge=1)

    def weight_for(self, width: int) -> float:
        """Sparse-term weight for a 3 x width matrix"""
        if self.lmbda is not None:
            return self.lmbda
        return 1.0 / np.sqrt(max(3, width))

    def to_dict(self) -> dict:
        return {
            'lmbda': self.lmbda,
            'mu': self.mu,
            'tol': self.tol,
            'max_iter': self.max_iter,
        }


@dataclass(frozen=True)
class Decomposition:
    """Low-rank part L and sparse part S of a patch matrix"""
    low_rank: np.ndarray
    sparse: np.ndarray
    iterations: int
    converged: bool

    def residual(self, matrix: np.ndarray) -> float:
        """Relative Frobenius residual of M - L - S"""
        norm = np.linalg.norm(matrix)
        if norm == 0:
            return float(np.linalg.norm(self.low_rank + self.sparse))
        return float(np.linalg.norm(matrix - self.low_rank - self.sparse) / norm)


@dataclass(frozen=True)
class BatchDecomposition:
    """Stacked decompositions of many patch matrices"""
    low_rank: np.ndarray
    sparse: np.ndarray
    iterations: np.ndarray
    converged: np.ndarray

    def __len__(self) -> int:
        return self.low_rank.shape[0]

    def __getitem__(self, i: int) -> Decomposition:
        return Decomposition(
            low_rank=self.low_rank[i],
            sparse=self.sparse[i],
            iterations=int(self.iterations[i]),
            converged=bool(self.converged[i]),
        )


@dataclass(frozen=True)
class Descriptor:
    """Sorted singular values of a patch's low-rank part"""
    singular_values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.singular_values, dtype=np.float64).reshape(3)
        if np.any(values < 0) or np.any(np.diff(values) > 0):
            raise ValueError(f"descriptor must be non-negative and nonincreasing: {values}")
        object.__setattr__(self, 'singular_values', values)

    def as_array(self) -> np.ndarray:
        return self.singular_values


def shrink(x, tau):
    """Element-wise soft thresholding sign(x) * max(|x| - tau, 0)"""
    if np.any(np.asarray(tau) < 0):
        raise ValueError(f"tau must be non-negative, got {tau}")
    return np.sign(x) * np.maximum(np.abs(x) - tau, 0.0)


def _svt(matrices: np.ndarray, tau) -> np.ndarray:
    # tau is a scalar or one threshold per stacked matrix
    u, s, vt = np.linalg.svd(matrices, full_matrices=False)
    tau = np.asarray(tau, dtype=np.float64)
    if tau.ndim:
        tau = tau[..., None]
    shrunk = shrink(s, tau)
    return (u * shrunk[..., None, :]) @ vt


def svt(matrix: np.ndarray, tau: float) -> np.ndarray:
    """
    Singular value thresholding

    Args:
        matrix: Finite 2D matrix
        tau: Non-negative threshold

    Returns:
        np.ndarray: U diag(shrink(s, tau)) V^T
    """
    if tau < 0:
        raise ValueError(f"tau must be non-negative, got {tau}")
    matrix = np.asarray(matrix, dtype=np.float64)
    if not np.all(np.isfinite(matrix)):
        raise NonFiniteError("svt input contains non-finite entries")
    return _svt(matrix, tau)


def decompose_batch(matrices: np.ndarray, params: RpcaParams = None) -> BatchDecomposition:
    """
    Decompose a stack of 3xK matrices, each M = L + S

    Every matrix runs its own ALM iteration from S = Y = 0 with a fixed
    penalty mu; finished matrices leave the active set. A zero matrix
    returns L = S = 0 after one iteration. A matrix that has
    not converged after max_iter keeps its lowest-residual iterate.

    Args:
        matrices: (n, 3, K) stack
        params: Solver parameters

    Returns:
        BatchDecomposition: Stacked L, S, iteration counts and convergence flags
    """
    params = params or RpcaParams()
    m = np.asarray(matrices, dtype=np.float64)
    if m.ndim != 3:
        raise ValueError(f"expected a (n, rows, cols) stack, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NonFiniteError("patch matrix contains non-finite entries")

    count = m.shape[0]
    low = np.zeros_like(m)
    sparse = np.zeros_like(m)
    iterations = np.zeros(count, dtype=np.int64)
    converged = np.zeros(count, dtype=bool)

    norms = np.linalg.norm(m, axis=(1, 2))
    converged[norms == 0] = True
    iterations[norms == 0] = 1
    active = np.flatnonzero(norms > 0)
    if active.size == 0:
        return BatchDecomposition(low, sparse, iterations, converged)

    lam = params.weight_for(m.shape[2])
    if params.mu is not None:
        mu = np.full(count, params.mu)
    else:
        l1 = np.abs(m).sum(axis=(1, 2))
        mu = m[0].size / (4.0 * np.where(l1 > 0, l1, 1.0))

    s_state = np.zeros_like(m)
    y_state = np.zeros_like(m)
    best = np.full(count, np.inf)

    for it in range(1, params.max_iter + 1):
        target = m[active]
        inv_mu = 1.0 / mu[active]
        inv_b = inv_mu[:, None, None]

        l_new = _svt(target - s_state[active] + inv_b * y_state[active], inv_mu)
        s_new = shrink(target - l_new + inv_b * y_state[active], lam * inv_b)
        resid = target - l_new - s_new
        y_state[active] += mu[active][:, None, None] * resid
        s_state[active] = s_new

        err = np.linalg.norm(resid, axis=(1, 2)) / norms[active]
        better = err < best[active]
        picked = active[better]
        low[picked] = l_new[better]
        sparse[picked] = s_new[better]
        best[picked] = err[better]
        iterations[active] = it

        done = err <= params.tol
        converged[active[done]] = True
        active = active[~done]
        if active.size == 0:
            break

    if active.size:
        logger.warning("RPCA did not converge for %d of %d patches within %d iterations",
                       active.size, count, params.max_iter)
    return BatchDecomposition(low, sparse, iterations, converged)


def decompose(matrix: np.ndarray, params: RpcaParams = None) -> Decomposition:
    """
    Decompose one patch matrix M into low-rank L and sparse S

    Args:
        matrix: 3xK patch matrix
        params: Solver parameters

    Returns:
        Decomposition: L, S, iteration count and convergence flag
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2:
        raise ValueError(f"expected a 2D matrix, got shape {matrix.shape}")
    return decompose_batch(matrix[None], params)[0]


def singular_values(matrices: np.ndarray) -> np.ndarray:
    """Three nonincreasing singular values per matrix, zero padded"""
    m = np.asarray(matrices, dtype=np.float64)
    values = np.linalg.svd(m, compute_uv=False)
    if values.shape[-1] < 3:
        pad = [(0, 0)] * (values.ndim - 1) + [(0, 3 - values.shape[-1])]
        values = np.pad(values, pad)
    return values[..., :3]


def covariance_eigenvalues(matrices: np.ndarray) -> np.ndarray:
    """Eigenvalues of M M^T per matrix, nonincreasing"""
    m = np.asarray(matrices, dtype=np.float64)
    gram = m @ np.swapaxes(m, -1, -2)
    values = np.linalg.eigvalsh(gram)[..., ::-1]
    return np.maximum(values, 0.0)


def descriptor(low_rank: np.ndarray) -> Descriptor:
    """Similarity signature of a patch: the singular values of its low-rank part"""
    low_rank = np.asarray(low_rank, dtype=np.float64)
    if not np.all(np.isfinite(low_rank)):
        raise NonFiniteError("low-rank matrix contains non-finite entries")
    return Descriptor(singular_values(low_rank))


def covariance_descriptor(matrix: np.ndarray) -> Descriptor:
    """Alternative signature: eigenvalues of the patch covariance M M^T"""
    return Descriptor(covariance_eigenvalues(matrix))
