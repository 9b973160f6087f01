"""Round-robin greedy samplers on eigenvector submatrices: MSV, Frob and Par.

Subset ``p = i mod K`` takes the ``i``-th pick; the pick optimises a spectral
criterion of the rows ``A_p + {q}`` of a bandwidth-``B`` eigenvector block.
Ties go to the lowest node index.
"""
from __future__ import annotations

import numpy as np

from ..errors import ConfigError
from ..spectral import SpectralDecomposition
from .base import FIXED_K, SamplingPartition

RANK_TOL = 1e-10


def min_singular_value(rows: np.ndarray) -> float:
    return float(np.linalg.svd(rows, compute_uv=False).min())


def frobenius_criterion(rows: np.ndarray) -> float:
    """``sum_j 1 / sigma_j^2`` (``inf`` when a singular value vanishes)."""
    s = np.linalg.svd(rows, compute_uv=False)
    if s.min() <= RANK_TOL:
        return np.inf
    return float(np.sum(1.0 / s ** 2))


def parallelepiped_criterion(rows: np.ndarray) -> float:
    """Product of the eigenvalues of the ``B x B`` Gram matrix ``rows^T rows``.

    Eigenvalues below ``RANK_TOL`` count as exact zeros so that rank-deficient
    candidates tie instead of competing on rounding noise.
    """
    lam = np.linalg.eigvalsh(rows.T @ rows)
    lam = np.where(lam <= RANK_TOL, 0.0, lam)
    return float(np.prod(lam))


def _round_robin(basis: np.ndarray, k: int, crit, maximize: bool, name: str,
                 meta: dict) -> SamplingPartition:
    n = basis.shape[0]
    if not 1 <= k <= n:
        raise ConfigError(f"K must lie in [1, {n}], got {k}")
    subsets: list[list[int]] = [[] for _ in range(k)]
    remaining = list(range(n))
    values = [None] * k
    for i in range(n):
        p = i % k
        scores = np.array([crit(basis[subsets[p] + [q]]) for q in remaining])
        j = int(np.argmax(scores) if maximize else np.argmin(scores))
        subsets[p].append(remaining.pop(j))
        values[p] = float(scores[j])
    return SamplingPartition(subsets, algorithm=name, mode=FIXED_K,
                             meta=dict(meta, criterion=values))


def _basis(decomp: SpectralDecomposition, bandwidth, adjacency=False):
    d = decomp if bandwidth is None else decomp.with_bandwidth(bandwidth)
    return d.ub if adjacency else d.vb


def msv_partition(decomp: SpectralDecomposition, k: int, bandwidth: int | None = None
                  ) -> SamplingPartition:
    """Maximise the smallest singular value of the adjacency-eigenvector rows."""
    u = _basis(decomp, bandwidth, adjacency=True)
    return _round_robin(u, k, min_singular_value, True, "msv", {"bandwidth": u.shape[1]})


def frob_partition(decomp: SpectralDecomposition, k: int, bandwidth: int | None = None
                   ) -> SamplingPartition:
    v = _basis(decomp, bandwidth)
    return _round_robin(v, k, frobenius_criterion, False, "frob", {"bandwidth": v.shape[1]})


def par_partition(decomp: SpectralDecomposition, k: int, bandwidth: int | None = None,
                  maximize: bool = False) -> SamplingPartition:
    """Parallelepiped-volume sampler; argmin by default, ``maximize`` flips it."""
    v = _basis(decomp, bandwidth)
    return _round_robin(v, k, parallelepiped_criterion, maximize, "par",
                        {"bandwidth": v.shape[1], "maximize": maximize})
