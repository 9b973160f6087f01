"""Phase-II samplers that split sensors into representative subsets."""
from __future__ import annotations

from ..errors import ConfigError
from ..spectral import DEFAULT_ETA
from .base import (FIXED_K, MAX_K, PartitionRequest, SamplingPartition, load_partition_json,
                   save_partition_json)
from .baseline import exhaustive_partition, random_partition, restricted_growth_strings, stirling2
from .community import communities, eigenvector_centrality
from .mse import jip_partition, jip_partition_k, sip_partition
from .spectral_greedy import frob_partition, msv_partition, par_partition
from .strat import SCORERS, StratConfig, max_subsets, strat_partition

SAMPLERS = ("srel", "smmr", "semmr", "msv", "jip", "sip", "frob", "par", "random")


def run_sampler(name: str, graph, decomp, k: int | None = None, epsilon: float | None = None,
                dataset=None, eta=DEFAULT_ETA, seed: int = 0, mmr_beta: float = 0.4,
                par_maximize: bool = False) -> SamplingPartition:
    """Dispatch one sampler by name.

    Fixed-K mode is used when ``k`` is given. ``epsilon`` alone selects the
    error-bounded mode, available for the stratified samplers (reconstruction
    error) and JIP (MSE).
    """
    if name not in SAMPLERS:
        raise ConfigError(f"unknown sampler {name!r}; choose from {SAMPLERS}")
    if (k is None) == (epsilon is None):
        raise ConfigError("give exactly one of K / epsilon")
    if name in SCORERS:
        mode = FIXED_K if k is not None else MAX_K
        req = PartitionRequest(mode, k, epsilon, decomp, eta, dataset)
        return strat_partition(graph, req, StratConfig(name, mmr_beta, seed))
    if name == "jip":
        if k is not None:
            return jip_partition_k(decomp, k, eta)
        return jip_partition(decomp, epsilon, eta)
    if k is None:
        raise ConfigError(f"{name} needs K")
    if name == "msv":
        return msv_partition(decomp, k)
    if name == "sip":
        return sip_partition(decomp, k, eta)
    if name == "frob":
        return frob_partition(decomp, k)
    if name == "par":
        return par_partition(decomp, k, maximize=par_maximize)
    return random_partition(decomp.n, k, seed)


__all__ = [
    "FIXED_K", "MAX_K", "PartitionRequest", "SAMPLERS", "SCORERS", "SamplingPartition",
    "StratConfig", "communities", "eigenvector_centrality", "exhaustive_partition",
    "frob_partition", "jip_partition", "jip_partition_k", "load_partition_json",
    "max_subsets", "msv_partition", "par_partition", "random_partition",
    "restricted_growth_strings", "run_sampler", "save_partition_json", "sip_partition",
    "stirling2", "strat_partition",
]
