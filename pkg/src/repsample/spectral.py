"""Graph-spectral core: Laplacian, GFT, bandlimited reconstruction and the
greedy-MSE machinery used by the MSE-based samplers.

Conventions
-----------
* ``L = D - A`` (combinatorial, positive semidefinite).
* Eigenvectors are columns of ``eigenvectors``, eigenvalues ascending, each
  column sign-fixed so that its first non-negligible entry is positive.
* ``V_B`` is the ``n x B`` matrix of the first ``B`` eigenvectors; the row
  ``V_B[i]`` is the spectral signature of node ``i``.
* The MSE prior is ``Lambda_B`` (first ``B`` eigenvalues) with eigenvalues
  below ``EIG_FLOOR`` lifted to ``EIG_FLOOR`` so it can be inverted.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, DuplicateNode
from .graph import SimilarityGraph

EIG_FLOOR = 1e-8
DEFAULT_ETA = 1e-2
# Singular values of V_B[subset] below this fraction of the largest are dropped
# by the interpolating pseudo-inverse, capping noise gain near 1/sqrt(eta).
PINV_RCOND = math.sqrt(DEFAULT_ETA)


def default_bandwidth(n: int, k: int | None = None) -> int:
    if k:
        return max(1, min(n, math.ceil(n / k)))
    return max(1, min(n, math.ceil(n / 4)))


def laplacian(graph: SimilarityGraph | np.ndarray) -> np.ndarray:
    a = _adjacency(graph).astype(float)
    return np.diag(a.sum(axis=1)) - a


def _adjacency(graph) -> np.ndarray:
    if isinstance(graph, SimilarityGraph):
        return graph.adjacency
    return np.asarray(graph)


def fix_signs(vecs: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Flip columns so the first entry with ``|v| > tol`` is positive."""
    vecs = vecs.copy()
    for j in range(vecs.shape[1]):
        col = vecs[:, j]
        idx = np.flatnonzero(np.abs(col) > tol)
        if idx.size and col[idx[0]] < 0:
            vecs[:, j] = -col
    return vecs


@dataclass(frozen=True)
class SpectralDecomposition:
    laplacian: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    bandwidth: int
    adjacency_eigenvalues: np.ndarray | None = field(default=None, repr=False)
    adjacency_eigenvectors: np.ndarray | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.eigenvectors.shape[0]

    @property
    def vb(self) -> np.ndarray:
        """First ``bandwidth`` Laplacian eigenvectors (``n x B``)."""
        return self.eigenvectors[:, : self.bandwidth]

    @property
    def ub(self) -> np.ndarray:
        """First ``bandwidth`` adjacency eigenvectors by descending |eigenvalue|."""
        if self.adjacency_eigenvectors is None:
            raise ValueError("decomposition was built without the adjacency spectrum")
        return self.adjacency_eigenvectors[:, : self.bandwidth]

    def prior(self) -> np.ndarray:
        """Regularised ``Lambda_B`` diagonal used as ``Q_0``."""
        lam = self.eigenvalues[: self.bandwidth].copy()
        return np.where(lam < EIG_FLOOR, EIG_FLOOR, lam)

    def with_bandwidth(self, bandwidth: int) -> "SpectralDecomposition":
        _check_bandwidth(bandwidth, self.n)
        return SpectralDecomposition(
            self.laplacian, self.eigenvalues, self.eigenvectors, bandwidth,
            self.adjacency_eigenvalues, self.adjacency_eigenvectors)


def _check_bandwidth(bandwidth, n):
    if not 1 <= bandwidth <= n:
        raise ValueError(f"bandwidth must be in [1, {n}], got {bandwidth}")


def decompose(graph: SimilarityGraph | np.ndarray, bandwidth: int) -> SpectralDecomposition:
    a = _adjacency(graph).astype(float)
    n = a.shape[0]
    _check_bandwidth(bandwidth, n)
    lap = np.diag(a.sum(axis=1)) - a
    w, v = np.linalg.eigh(lap)
    v = fix_signs(v)

    aw, av = np.linalg.eigh(a)
    order = np.argsort(-np.abs(aw), kind="stable")
    aw, av = aw[order], fix_signs(av[:, order])

    for arr in (lap, w, v, aw, av):
        arr.flags.writeable = False
    return SpectralDecomposition(lap, w, v, bandwidth, aw, av)


def _as_signal(decomp, x):
    x = np.asarray(x, dtype=float)
    if x.shape[0] != decomp.n:
        raise DimensionMismatch(f"signal has {x.shape[0]} entries, graph has {decomp.n} nodes")
    return x


def gft(decomp: SpectralDecomposition, x) -> np.ndarray:
    """Graph Fourier transform; ``x`` may be one signal or an ``n x t`` stack."""
    return decomp.eigenvectors.T @ _as_signal(decomp, x)


def igft(decomp: SpectralDecomposition, xhat) -> np.ndarray:
    return decomp.eigenvectors @ _as_signal(decomp, xhat)


def is_bandlimited(decomp: SpectralDecomposition, x, bandwidth: int | None = None,
                   tol: float = 1e-10) -> bool:
    b = decomp.bandwidth if bandwidth is None else bandwidth
    coeffs = gft(decomp, x)
    return bool(np.all(np.abs(coeffs[b:]) < tol))


def reconstruct(decomp: SpectralDecomposition, subset, observed) -> np.ndarray:
    """Least-squares bandlimited interpolation from the readings at ``subset``.

    ``observed`` has one row per node in ``subset`` (a vector, or ``|S| x t``).
    """
    subset = list(subset)
    if not subset:
        raise ValueError("subset must be non-empty")
    observed = np.asarray(observed, dtype=float)
    if observed.shape[0] != len(subset):
        raise DimensionMismatch("observed values do not match the subset size")
    return interpolation_matrix(decomp, subset) @ observed


def interpolation_matrix(decomp: SpectralDecomposition, subset) -> np.ndarray:
    """``V_B pinv(V_B[subset])``: maps readings at ``subset`` to all nodes."""
    vb = decomp.vb
    return vb @ np.linalg.pinv(vb[list(subset)], rcond=PINV_RCOND)


def _eta_vector(eta, n):
    eta = np.broadcast_to(np.asarray(eta, dtype=float), (n,)).copy()
    if np.any(eta <= 0):
        raise ValueError("noise variances must be positive")
    return eta


def mse_of_subset(decomp: SpectralDecomposition, eta, subset) -> float:
    """Direct form ``Tr[V_B (Lambda^-1 + sum eta_i^-1 v_i v_i^T)^-1 V_B^T]``."""
    eta = _eta_vector(eta, decomp.n)
    vb = decomp.vb
    info = np.diag(1.0 / decomp.prior())
    for i in subset:
        info += np.outer(vb[i], vb[i]) / eta[i]
    return float(np.trace(vb @ np.linalg.inv(info) @ vb.T))


@dataclass
class MseState:
    """Running ``Q_j`` for one subset while nodes are appended one at a time."""

    vb: np.ndarray
    q: np.ndarray
    eta: np.ndarray
    selected: list[int] = field(default_factory=list)

    @classmethod
    def initial(cls, decomp: SpectralDecomposition, eta=DEFAULT_ETA) -> "MseState":
        return cls(decomp.vb, np.diag(decomp.prior()), _eta_vector(eta, decomp.n), [])

    @property
    def mse(self) -> float:
        # Tr[V_B Q V_B^T] = Tr[Q] because V_B has orthonormal columns
        return float(np.trace(self.q))

    def candidate_mse(self, candidate: int) -> float:
        v = self.vb[candidate]
        qv = self.q @ v
        return float(np.trace(self.q) - qv @ qv / (self.eta[candidate] + v @ qv))

    def candidate_mses(self, candidates) -> np.ndarray:
        """Vectorised ``candidate_mse`` over many nodes."""
        idx = np.asarray(list(candidates), dtype=int)
        v = self.vb[idx]
        qv = v @ self.q
        num = np.einsum("ij,ij->i", qv, qv)
        den = self.eta[idx] + np.einsum("ij,ij->i", v, qv)
        return np.trace(self.q) - num / den

    def add(self, node: int) -> "MseState":
        if node in self.selected:
            raise DuplicateNode(f"node {node} already selected")
        v = self.vb[node]
        qv = self.q @ v
        q = self.q - np.outer(qv, qv) / (self.eta[node] + v @ qv)
        q = (q + q.T) / 2
        return MseState(self.vb, q, self.eta, self.selected + [node])


def incremental_mse(state: MseState, candidate: int) -> tuple[float, MseState]:
    if candidate in state.selected:
        raise DuplicateNode(f"node {candidate} already selected")
    value = state.candidate_mse(candidate)
    return value, state.add(candidate)


def single_node_mse(decomp: SpectralDecomposition, eta=DEFAULT_ETA) -> np.ndarray:
    return MseState.initial(decomp, eta).candidate_mses(range(decomp.n))


def n_components(decomp: SpectralDecomposition, tol: float = 1e-8) -> int:
    return int(np.sum(decomp.eigenvalues < tol))
