"""Build an unweighted sensor similarity graph from time-series readings.

Six pairwise measures are supported (``GraphBuildConfig.method``):

=======  ==========================================  ==============
method   pairwise quantity                           edge rule
=======  ==========================================  ==============
corr     Pearson correlation                         value > thr
deconv   network deconvolution ``S (I + S)^-1``      value > thr
dtw      FastDTW distance                            value < thr
haar     Euclidean distance of Haar-compressed rows  value < thr
knn      Euclidean distance, k nearest (union)       rank <= k
gsp      learned smooth-signal weights               value > thr
=======  ==========================================  ==============
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .dataset import TimeSeriesDataset
from .errors import CalibrationFailed, ConfigError, SingularMatrix, ZeroVariance
from .graph import METHODS, SimilarityGraph, edge_density
from .graphlearn import gsp_learn_weights
from .timeseries import dtw_matrix, haar_compress

EDGE_BELOW = "edge_below"
EDGE_ABOVE = "edge_above"
DENSITY_TOLERANCE = 0.05

DIRECTION = {
    "corr": EDGE_ABOVE,
    "deconv": EDGE_ABOVE,
    "gsp": EDGE_ABOVE,
    "dtw": EDGE_BELOW,
    "haar": EDGE_BELOW,
    "knn": EDGE_BELOW,
}


@dataclass
class GraphBuildConfig:
    method: str
    target_edge_density: float | None = None
    explicit_threshold: float | None = None
    dtw_radius: int = 1
    haar_keep: int | None = None
    knn_k: int | None = None
    gsp_alpha: float = 1.0
    gsp_beta: float = 1.0
    gsp_max_iter: int = 20000
    gsp_tol: float = 1e-6
    extra: dict = field(default_factory=dict)

    def validate(self, t: int | None = None) -> None:
        if self.method not in METHODS:
            raise ConfigError(f"unknown graph method {self.method!r}; choose from {METHODS}")
        has_target = self.target_edge_density is not None
        if has_target and not 0 < self.target_edge_density < 1:
            raise ConfigError("target_edge_density must lie in (0, 1)")
        if self.method == "knn":
            if has_target == (self.knn_k is not None):
                raise ConfigError("knn needs exactly one of knn_k / target_edge_density")
            if self.knn_k is not None and self.knn_k < 1:
                raise ConfigError("knn_k must be positive")
        elif has_target == (self.explicit_threshold is not None):
            raise ConfigError("set exactly one of target_edge_density / explicit_threshold")
        if self.dtw_radius < 1:
            raise ConfigError("dtw_radius must be a positive integer")
        if self.haar_keep is not None:
            if self.haar_keep < 1 or (t is not None and self.haar_keep > t):
                raise ConfigError("haar_keep must lie in [1, t]")
        if self.gsp_alpha <= 0 or self.gsp_beta < 0:
            raise ConfigError("gsp_alpha must be > 0 and gsp_beta >= 0")


def pearson(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1 or a.size < 2:
        raise ValueError("series must be 1-D, of equal length >= 2")
    da, db = a - a.mean(), b - b.mean()
    va, vb = np.mean(da * da), np.mean(db * db)
    if va == 0 or vb == 0:
        raise ZeroVariance("Pearson correlation is undefined for a constant series")
    return float(np.clip(np.mean(da * db) / math.sqrt(va * vb), -1.0, 1.0))


def correlation_matrix(values) -> np.ndarray:
    x = np.asarray(values, dtype=float)
    dx = x - x.mean(axis=1, keepdims=True)
    var = np.mean(dx * dx, axis=1)
    const = np.flatnonzero(var == 0)
    if const.size:
        raise ZeroVariance(f"sensor row {const[0]} is constant; correlation undefined")
    cov = dx @ dx.T / x.shape[1]
    sd = np.sqrt(var)
    return np.clip(cov / np.outer(sd, sd), -1.0, 1.0)


def covariance_matrix(values) -> np.ndarray:
    """Population covariance between rows (rows are mean-centred first)."""
    x = np.asarray(values, dtype=float)
    dx = x - x.mean(axis=1, keepdims=True)
    return dx @ dx.T / x.shape[1]


def deconvolution_adjacency(dataset: TimeSeriesDataset | np.ndarray) -> np.ndarray:
    values = dataset.values if isinstance(dataset, TimeSeriesDataset) else dataset
    sigma = covariance_matrix(values)
    m = np.eye(sigma.shape[0]) + sigma
    if np.linalg.cond(m) > 1e12:
        raise SingularMatrix("I + covariance is numerically singular")
    try:
        a = np.linalg.solve(m, sigma)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrix(str(exc)) from exc
    return (a + a.T) / 2


def haar_distance_matrix(values, keep: int) -> np.ndarray:
    comp = np.array([haar_compress(row, keep) for row in np.asarray(values, dtype=float)])
    return squareform(pdist(comp, "euclidean"))


def knn_adjacency(dist: np.ndarray, k: int) -> np.ndarray:
    """Union k-NN rule: ``i ~ j`` if either lists the other among its ``k`` nearest."""
    n = dist.shape[0]
    k = min(k, n - 1)
    a = np.zeros((n, n), dtype=bool)
    for i in range(n):
        others = np.array([j for j in range(n) if j != i])
        order = others[np.lexsort((others, dist[i, others]))]
        a[i, order[:k]] = True
    return a | a.T


def _upper(values: np.ndarray) -> np.ndarray:
    return values[np.triu_indices(values.shape[0], 1)]


def _threshold_adjacency(pairwise, threshold, direction) -> np.ndarray:
    with np.errstate(invalid="ignore"):
        a = pairwise < threshold if direction == EDGE_BELOW else pairwise > threshold
    a = a.copy()
    np.fill_diagonal(a, False)
    return a & a.T


def calibrate_threshold(pairwise: np.ndarray, target_density: float,
                        direction: str = EDGE_BELOW) -> tuple[float, float]:
    """Threshold whose achieved edge density is closest to ``target_density``.

    Candidate cuts sit between consecutive distinct off-diagonal values (the
    midpoint), plus the two extremes (no edges / all edges). Ties on distance to
    the target go to the sparser graph. Returns ``(threshold, achieved_density)``.
    """
    if not 0 < target_density < 1:
        raise ValueError("target density must lie in (0, 1)")
    vals = np.sort(_upper(np.asarray(pairwise, dtype=float)))
    m = vals.size
    if m == 0:
        raise ValueError("need at least two nodes")
    if direction == EDGE_ABOVE:
        vals = vals[::-1]
    distinct, first = np.unique(vals if direction == EDGE_BELOW else -vals, return_index=True)
    # counts[c] = number of edges when the cut is placed before distinct value c
    counts = np.append(first, m)
    target = target_density * m
    best = int(np.argmin(np.abs(counts - target) + 1e-9 * counts))
    if direction == EDGE_BELOW:
        if best == 0:
            thr = float(vals[0])
        elif best == len(distinct):
            thr = float(np.nextafter(vals[-1], np.inf))
        else:
            thr = float((distinct[best - 1] + distinct[best]) / 2)
    else:
        d = -distinct
        if best == 0:
            thr = float(vals[0])
        elif best == len(distinct):
            thr = float(np.nextafter(vals[-1], -np.inf))
        else:
            thr = float((d[best - 1] + d[best]) / 2)
    return thr, float(counts[best] / m)


def pairwise_matrix(dataset: TimeSeriesDataset, config: GraphBuildConfig) -> np.ndarray:
    """The method's raw pairwise distance/weight matrix (before thresholding)."""
    x = dataset.values
    method = config.method
    if method == "corr":
        return correlation_matrix(x)
    if method == "deconv":
        return deconvolution_adjacency(x)
    if method == "dtw":
        return dtw_matrix(x, radius=config.dtw_radius)
    if method == "haar":
        keep = config.haar_keep or math.ceil(dataset.t / 4)
        return haar_distance_matrix(x, keep)
    if method == "knn":
        return squareform(pdist(x, "euclidean"))
    if method == "gsp":
        return gsp_learn_weights(x, config.gsp_alpha, config.gsp_beta,
                                 config.gsp_max_iter, config.gsp_tol)
    raise ConfigError(f"unknown graph method {method!r}")


def calibrate_knn(dist: np.ndarray, target_density: float) -> tuple[int, float]:
    n = dist.shape[0]
    best_k, best_d = 1, None
    for k in range(1, n):
        d = edge_density(knn_adjacency(dist, k))
        if best_d is None or abs(d - target_density) < abs(best_d - target_density) - 1e-12:
            best_k, best_d = k, d
    return best_k, best_d


def graph_from_pairwise(pairwise: np.ndarray, config: GraphBuildConfig,
                        n_timestamps: int | None = None) -> SimilarityGraph:
    """Threshold a precomputed pairwise matrix according to ``config``."""
    config.validate(n_timestamps)
    target = config.target_edge_density
    if config.method == "knn":
        k = config.knn_k
        if target is not None:
            k, _ = calibrate_knn(pairwise, target)
        adj = knn_adjacency(pairwise, k)
        threshold = float(k)
    else:
        direction = DIRECTION[config.method]
        if target is not None:
            threshold, _ = calibrate_threshold(pairwise, target, direction)
        else:
            threshold = float(config.explicit_threshold)
        adj = _threshold_adjacency(pairwise, threshold, direction)

    achieved = edge_density(adj)
    if target is not None and abs(achieved - target) > DENSITY_TOLERANCE:
        raise CalibrationFailed(
            f"{config.method}: closest attainable edge density {achieved:.3f} "
            f"is more than {DENSITY_TOLERANCE} from target {target:.3f}")
    return SimilarityGraph(adj, config.method, threshold, achieved, target,
                           meta={"connected": _is_connected(adj)})


def build_graph(dataset: TimeSeriesDataset, config: GraphBuildConfig) -> SimilarityGraph:
    config.validate(dataset.t)
    return graph_from_pairwise(pairwise_matrix(dataset, config), config, dataset.t)


def _is_connected(adj: np.ndarray) -> bool:
    n = adj.shape[0]
    seen = {0}
    stack = [0]
    while stack:
        i = stack.pop()
        for j in np.flatnonzero(adj[i]):
            if j not in seen:
                seen.add(int(j))
                stack.append(int(j))
    return len(seen) == n
