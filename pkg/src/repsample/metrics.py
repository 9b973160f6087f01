"""Evaluation of graphs and partitions: reconstruction error, TCER, graph
statistics and the GFT amplitude spectrum."""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.sparse.csgraph import shortest_path

from .errors import ZeroSignal
from .graph import SimilarityGraph, edge_density
from .spectral import SpectralDecomposition, gft, interpolation_matrix


def _values(data) -> np.ndarray:
    return np.asarray(getattr(data, "values", data), dtype=float)


def timestamp_errors(data, decomp: SpectralDecomposition, subset) -> np.ndarray:
    """Relative error ``||x - x_hat|| / ||x||`` per timestamp; NaN where ``x = 0``."""
    x = _values(data)
    subset = list(subset)
    xhat = interpolation_matrix(decomp, subset) @ x[subset]
    num = np.linalg.norm(x - xhat, axis=0)
    den = np.linalg.norm(x, axis=0)
    out = np.full(x.shape[1], np.nan)
    ok = den > 0
    out[ok] = num[ok] / den[ok]
    return out


def subset_error(data, decomp: SpectralDecomposition, subset) -> float:
    """Mean relative reconstruction error of one subset over non-zero timestamps."""
    errs = timestamp_errors(data, decomp, subset)
    kept = errs[~np.isnan(errs)]
    if kept.size == 0:
        raise ZeroSignal("every timestamp is an all-zero graph signal")
    return float(kept.mean())


@dataclass
class EvaluationReport:
    per_subset_err: list[float]
    total_err: float
    mean_err: float
    k: int
    tcer: float | None = None
    tcer_clamped: bool = False
    edge_density: float | None = None
    avg_path_length: float | None = None
    avg_clustering: float | None = None
    skipped_timestamps: int = 0
    raw_errors: list[list[float]] = field(default_factory=list, repr=False)

    def quartiles(self) -> tuple[float, float, float, float, float]:
        q = np.percentile(self.per_subset_err, [0, 25, 50, 75, 100])
        return tuple(float(v) for v in q)

    def to_dict(self, include_raw: bool = True) -> dict:
        d = asdict(self)
        if self.avg_path_length is not None and math.isinf(self.avg_path_length):
            d["avg_path_length"] = "inf"
        if not include_raw:
            d.pop("raw_errors")
        else:
            d["raw_errors"] = [[None if math.isnan(v) else v for v in row] for row in self.raw_errors]
        return d


def reconstruction_error(data, decomp: SpectralDecomposition, partition) -> EvaluationReport:
    """Per-subset mean relative error, their sum and their mean over subsets.

    All-zero timestamps are skipped (with a warning) and the average is taken
    over the retained timestamps only.
    """
    subsets = getattr(partition, "subsets", partition)
    per, raw = [], []
    skipped = 0
    for s in subsets:
        errs = timestamp_errors(data, decomp, s)
        kept = errs[~np.isnan(errs)]
        if kept.size == 0:
            raise ZeroSignal("every timestamp is an all-zero graph signal")
        skipped = errs.size - kept.size
        per.append(float(kept.mean()))
        raw.append(errs.tolist())
    if skipped:
        warnings.warn(f"skipped {skipped} all-zero timestamps", RuntimeWarning, stacklevel=2)
    total = float(sum(per))
    return EvaluationReport(per, total, total / len(per), len(per),
                            skipped_timestamps=skipped, raw_errors=raw)


def total_cumulative_energy(values, basis) -> float:
    """``sum_r (N + 1 - r) ||q_r^T X||^2`` for the columns ``q_r`` of ``basis``."""
    x = _values(values)
    n = x.shape[0]
    energy = np.sum((basis.T @ x) ** 2, axis=1)
    weights = n + 1 - np.arange(1, n + 1)
    return float(weights @ energy)


def tcer(data, decomp: SpectralDecomposition | np.ndarray, return_clamped: bool = False):
    """Total cumulative energy residual of the Laplacian eigenbasis."""
    x = _values(data)
    n = x.shape[0]
    basis = decomp.eigenvectors if isinstance(decomp, SpectralDecomposition) else np.asarray(decomp)
    sv = np.zeros(n)
    s = np.linalg.svd(x, compute_uv=False)
    sv[: s.size] = s
    # sum_{R=1}^N sum_{r<=R} sigma_r^2 == sum_r (N + 1 - r) sigma_r^2
    denom = float((n + 1 - np.arange(1, n + 1)) @ (sv ** 2))
    if denom == 0:
        raise ZeroSignal("data matrix is identically zero")
    value = 1.0 - total_cumulative_energy(x, basis) / denom
    clamped = not 0.0 <= value <= 1.0
    value = min(1.0, max(0.0, value))
    return (value, clamped) if return_clamped else value


@dataclass(frozen=True)
class GraphStats:
    edge_density: float
    avg_path_length: float
    avg_clustering: float

    def to_dict(self) -> dict:
        return {
            "edge_density": self.edge_density,
            "avg_path_length": "inf" if math.isinf(self.avg_path_length) else self.avg_path_length,
            "avg_clustering": self.avg_clustering,
        }


def graph_stats(graph: SimilarityGraph | np.ndarray) -> GraphStats:
    a = np.asarray(getattr(graph, "adjacency", graph), dtype=bool)
    n = a.shape[0]
    if n < 2:
        return GraphStats(0.0, 0.0, 0.0)
    dist = shortest_path(a.astype(float), unweighted=True, directed=False)
    off = dist[~np.eye(n, dtype=bool)]
    apl = math.inf if np.isinf(off).any() else float(off.mean())

    cc = np.zeros(n)
    for i in range(n):
        nb = np.flatnonzero(a[i])
        d = nb.size
        if d >= 2:
            links = a[np.ix_(nb, nb)].sum() / 2
            cc[i] = links / (d * (d - 1) / 2)
    return GraphStats(edge_density(a), apl, float(cc.mean()))


def gft_spectrum(decomp: SpectralDecomposition, data) -> list[tuple[float, float]]:
    """Mean absolute GFT amplitude per Laplacian eigenvalue, over timestamps."""
    amp = np.abs(gft(decomp, _values(data))).mean(axis=1)
    return [(float(lam), float(a)) for lam, a in zip(decomp.eigenvalues, amp)]


def save_spectrum_csv(spectrum, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "eigenvalue", "mean_amplitude"])
        for i, (lam, a) in enumerate(spectrum):
            w.writerow([i, repr(lam), repr(a)])


def evaluate(data, graph, decomp: SpectralDecomposition, partition) -> EvaluationReport:
    """Reconstruction errors plus TCER and graph statistics in one report."""
    rep = reconstruction_error(data, decomp, partition)
    rep.tcer, rep.tcer_clamped = tcer(data, decomp, return_clamped=True)
    st = graph_stats(graph)
    rep.edge_density = st.edge_density
    rep.avg_path_length = st.avg_path_length
    rep.avg_clustering = st.avg_clustering
    return rep
