"""Community structure and node relevance on an unweighted graph."""
from __future__ import annotations

import networkx as nx
import numpy as np

from ..errors import NotConverged
from ..graph import SimilarityGraph


def _adj(graph) -> np.ndarray:
    return np.asarray(getattr(graph, "adjacency", graph), dtype=bool)


def to_networkx(graph: SimilarityGraph | np.ndarray) -> nx.Graph:
    a = _adj(graph)
    g = nx.Graph()
    g.add_nodes_from(range(a.shape[0]))
    g.add_edges_from(zip(*np.nonzero(np.triu(a, 1))))
    return g


def communities(graph, seed: int = 0) -> list[list[int]]:
    """Louvain modularity communities, each sorted, ordered by smallest member.

    Isolated nodes come back as singleton communities.
    """
    g = to_networkx(graph)
    if g.number_of_edges() == 0:
        return [[v] for v in sorted(g.nodes)]
    parts = nx.community.louvain_communities(g, seed=seed)
    out = [sorted(int(v) for v in c) for c in parts]
    return sorted(out, key=lambda c: c[0])


def _components(a: np.ndarray) -> list[np.ndarray]:
    n = a.shape[0]
    label = np.full(n, -1)
    comps = []
    for s in range(n):
        if label[s] >= 0:
            continue
        stack, members = [s], []
        label[s] = len(comps)
        while stack:
            i = stack.pop()
            members.append(i)
            for j in np.flatnonzero(a[i]):
                if label[j] < 0:
                    label[j] = len(comps)
                    stack.append(j)
        comps.append(np.array(sorted(members)))
    return comps


def eigenvector_centrality(graph, tol: float = 1e-10, max_iter: int = 10_000) -> np.ndarray:
    """Principal adjacency eigenvector per connected component, max-normalised.

    Power iteration runs on ``A + I`` (same eigenvectors, and the shift keeps
    bipartite components from oscillating). A single-node component scores 1.
    """
    a = _adj(graph).astype(float)
    scores = np.zeros(a.shape[0])
    for comp in _components(a > 0):
        if comp.size == 1:
            scores[comp] = 1.0
            continue
        m = a[np.ix_(comp, comp)] + np.eye(comp.size)
        x = np.ones(comp.size)
        for _ in range(max_iter):
            y = m @ x
            y /= y.max()
            if np.abs(y - x).max() < tol:
                x = y
                break
            x = y
        else:
            raise NotConverged(f"power iteration did not converge in {max_iter} iterations")
        scores[comp] = x
    return scores
