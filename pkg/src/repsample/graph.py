"""Unweighted similarity graph over sensors, plus JSON / CSV edge-list I/O."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

METHODS = ("corr", "deconv", "dtw", "haar", "knn", "gsp")


def edge_density(adjacency: np.ndarray) -> float:
    n = adjacency.shape[0]
    if n < 2:
        return 0.0
    m = int(np.triu(adjacency, 1).sum())
    return m / (n * (n - 1) / 2)


@dataclass
class SimilarityGraph:
    adjacency: np.ndarray
    method: str
    threshold: float
    achieved_edge_density: float | None = None
    target_edge_density: float | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        a = np.asarray(self.adjacency, dtype=bool)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("adjacency must be square")
        if not np.array_equal(a, a.T):
            raise ValueError("adjacency must be symmetric")
        if a.diagonal().any():
            raise ValueError("adjacency must have a zero diagonal")
        a = a.copy()
        a.flags.writeable = False
        self.adjacency = a
        dens = edge_density(a)
        if self.achieved_edge_density is None:
            self.achieved_edge_density = dens
        elif not math.isclose(self.achieved_edge_density, dens, abs_tol=1e-12):
            raise ValueError(
                f"stored edge density {self.achieved_edge_density} != recomputed {dens}")

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def n_edges(self) -> int:
        return int(np.triu(self.adjacency, 1).sum())

    def edges(self) -> list[tuple[int, int]]:
        i, j = np.nonzero(np.triu(self.adjacency, 1))
        return [(int(a), int(b)) for a, b in zip(i, j)]

    def neighbors(self, i: int) -> set[int]:
        return set(np.flatnonzero(self.adjacency[i]).tolist())

    def has_edge(self, i: int, j: int) -> bool:
        return bool(self.adjacency[i, j])

    @classmethod
    def from_edges(cls, n: int, edges, method: str = "given", threshold: float = float("nan"), **kw):
        a = np.zeros((n, n), dtype=bool)
        for i, j in edges:
            if i == j:
                raise ValueError("self loops are not allowed")
            a[i, j] = a[j, i] = True
        return cls(a, method, threshold, **kw)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "method": self.method,
            "threshold": _json_float(self.threshold),
            "achieved_edge_density": self.achieved_edge_density,
            "target_edge_density": self.target_edge_density,
            "edges": [list(e) for e in self.edges()],
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SimilarityGraph":
        thr = d.get("threshold")
        thr = float(thr) if thr is not None else float("nan")
        return cls.from_edges(
            int(d["n"]), d["edges"], method=d.get("method", "given"), threshold=thr,
            target_edge_density=d.get("target_edge_density"), meta=d.get("meta", {}))


def _json_float(x):
    if x is None:
        return None
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return None
    return x


def save_graph_json(graph: SimilarityGraph, path, extra: dict | None = None) -> None:
    d = graph.to_dict()
    if extra:
        d.update(extra)
    Path(path).write_text(json.dumps(d, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def load_graph_json(path) -> SimilarityGraph:
    return SimilarityGraph.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def save_edge_csv(graph: SimilarityGraph, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["source", "target"])
        w.writerows(graph.edges())
