"""Community-stratified samplers: SRel, SMMR and SEMMR.

Each subset draws its members from every community in turn. Inside a
community the unassigned node with the highest score is taken:

* ``srel``:  ``R_i`` (eigenvector centrality)
* ``smmr``:  ``beta R_i - (1 - beta) |N(i) minus the union of N(s), s in subset|``
* ``semmr``: ``beta R_i - (1 - beta) mean_s ||x_i - x_s||^2``
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, DegenerateCommunities, InfeasibleEpsilon
from ..metrics import subset_error
from .base import FIXED_K, MAX_K, PartitionRequest, SamplingPartition
from .community import _adj, communities, eigenvector_centrality

SCORERS = ("srel", "smmr", "semmr")


@dataclass
class StratConfig:
    scorer: str = "srel"
    mmr_beta: float = 0.4
    community_seed: int = 0

    def validate(self) -> None:
        if self.scorer not in SCORERS:
            raise ConfigError(f"unknown scorer {self.scorer!r}; choose from {SCORERS}")
        if not 0 <= self.mmr_beta <= 1:
            raise ConfigError("mmr_beta must lie in [0, 1]")


class _Scorer:
    def __init__(self, adj, relevance, config: StratConfig, values=None):
        self.adj = adj
        self.rel = relevance
        self.cfg = config
        self.values = values
        if config.scorer == "semmr" and values is None:
            raise ConfigError("semmr needs the dataset to score series differences")

    def start(self):
        """Fresh per-subset state: union of neighbourhoods and selected list."""
        return {"cover": np.zeros(self.adj.shape[0], dtype=bool), "sel": []}

    def push(self, state, node):
        state["cover"] |= self.adj[node]
        state["sel"].append(node)

    def best(self, cands: list[int], state) -> int:
        cands = np.asarray(cands)
        s = self.rel[cands]
        beta = self.cfg.mmr_beta
        if self.cfg.scorer == "smmr":
            gain = (self.adj[cands] & ~state["cover"]).sum(axis=1)
            s = beta * s - (1 - beta) * gain
        elif self.cfg.scorer == "semmr":
            if state["sel"]:
                x = self.values
                diff = x[cands][:, None, :] - x[state["sel"]][None, :, :]
                gain = (diff ** 2).sum(axis=2).mean(axis=1)
            else:
                gain = np.zeros(cands.size)
            s = beta * s - (1 - beta) * gain
        # argmax returns the first maximum; candidates are in ascending order
        return int(cands[int(np.argmax(s))])


def strat_partition(graph, request: PartitionRequest, config: StratConfig | None = None
                    ) -> SamplingPartition:
    config = config or StratConfig()
    config.validate()
    adj = _adj(graph)
    n = adj.shape[0]
    request.validate(n)
    comms = communities(adj, seed=config.community_seed)
    rel = eigenvector_centrality(adj)
    values = None if request.dataset is None else np.asarray(
        getattr(request.dataset, "values", request.dataset), dtype=float)
    scorer = _Scorer(adj, rel, config, values)
    meta = {"scorer": config.scorer, "mmr_beta": config.mmr_beta,
            "community_seed": config.community_seed, "communities": comms}
    if request.mode == FIXED_K:
        return _fixed_k(comms, scorer, request.k, n, config, meta)
    if request.mode == MAX_K:
        return _max_k(comms, scorer, request, n, config, meta)
    raise ConfigError(f"unknown mode {request.mode!r}")


def _fixed_k(comms, scorer, k, n, config, meta) -> SamplingPartition:
    smallest = min(len(c) for c in comms)
    if k > smallest * len(comms):
        raise DegenerateCommunities(
            f"K={k} exceeds smallest community ({smallest}) x {len(comms)} communities")
    commem = max(1, smallest // k)
    assigned = np.zeros(n, dtype=bool)
    subsets = []
    for x in range(k):
        state = scorer.start()
        for c in comms:
            for _ in range(commem):
                cands = [v for v in c if not assigned[v]]
                # hold back one node for every subset still to be seeded
                if not cands or (state["sel"] and n - assigned.sum() <= k - x - 1):
                    break
                v = scorer.best(cands, state)
                scorer.push(state, v)
                assigned[v] = True
        if not state["sel"]:
            raise DegenerateCommunities(
                f"communities exhausted after {x} of {k} subsets were seeded")
        subsets.append(state["sel"])
    leftover = np.flatnonzero(~assigned).tolist()
    for i, v in enumerate(leftover):
        subsets[i % k].append(v)
    meta = dict(meta, commem=commem, leftover=len(leftover))
    return SamplingPartition(subsets, algorithm=config.scorer, mode=FIXED_K, meta=meta)


def _max_k(comms, scorer, request, n, config, meta) -> SamplingPartition:
    if request.dataset is None or request.decomp is None:
        raise ConfigError("max_k mode needs both the dataset and a spectral decomposition")
    eps = request.epsilon

    def err(s):
        return subset_error(request.dataset, request.decomp, s)

    assigned = np.zeros(n, dtype=bool)
    subsets, errs = [], []
    tail, tail_err = [], None
    while not assigned.all():
        state = scorer.start()
        closed = False
        e = math.inf
        while not closed and not assigned.all():
            for c in comms:
                cands = [v for v in c if not assigned[v]]
                if not cands:
                    continue
                v = scorer.best(cands, state)
                scorer.push(state, v)
                assigned[v] = True
                e = err(state["sel"])
                if e <= eps:
                    closed = True
                    break
        if closed:
            subsets.append(state["sel"])
            errs.append(e)
        else:
            tail, tail_err = state["sel"], e

    flagged = []
    if tail:
        if not subsets:
            raise InfeasibleEpsilon(
                f"even all {n} sensors reconstruct with error {tail_err:.6g} > epsilon {eps:.6g}",
                certificate=tail_err)
        for i, v in enumerate(tail):
            subsets[i % len(subsets)].append(v)
            if i % len(subsets) not in flagged:
                flagged.append(i % len(subsets))
        for p in flagged:
            errs[p] = err(subsets[p])
    meta = dict(meta, subset_error=errs, leftover=len(tail))
    return SamplingPartition(subsets, algorithm=config.scorer, mode=MAX_K, epsilon=eps,
                             flagged=sorted(flagged), meta=meta)


def max_subsets(graph, decomp, epsilon: float, scorer: str = "srel", dataset=None,
                mmr_beta: float = 0.4, community_seed: int = 0) -> SamplingPartition:
    """Greedy maximum number of subsets whose reconstruction error is within ``epsilon``."""
    req = PartitionRequest(mode=MAX_K, epsilon=epsilon, decomp=decomp, dataset=dataset)
    return strat_partition(graph, req, StratConfig(scorer, mmr_beta, community_seed))
