"""Reference partitions: uniform random and exhaustive search."""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from ..errors import ConfigError, TooLarge
from ..metrics import subset_error
from .base import FIXED_K, SamplingPartition

MAX_EXHAUSTIVE_N = 12
MAX_EXHAUSTIVE_COUNT = 10**7


def _surjections(m: int, r: int, k: int) -> int:
    """Ways to label ``m`` nodes from ``k`` labels so that ``r`` given labels all appear."""
    return sum((-1) ** j * math.comb(r, j) * (k - j) ** m for j in range(r + 1))


def random_partition(n: int, k: int, seed: int = 0) -> SamplingPartition:
    """Labelling drawn uniformly from all maps onto ``K`` labels with none left empty.

    Nodes are labelled in order; each label probability is the exact share of
    completions that still cover every label, so no rejection loop is needed.
    """
    if not 1 <= k <= n:
        raise ConfigError(f"K must lie in [1, {n}], got {k}")
    rng = np.random.default_rng(seed)
    labels = np.empty(n, dtype=int)
    used = np.zeros(k, dtype=bool)
    for i in range(n):
        m = n - i - 1
        r = int((~used).sum())
        total = _surjections(m + 1, r, k)
        # completions that start with a fresh label, out of all valid completions
        p_new = r * _surjections(m, r - 1, k) / total if r else 0.0
        if rng.random() < p_new:
            pool = np.flatnonzero(~used)
        else:
            pool = np.flatnonzero(used)
        labels[i] = pool[rng.integers(pool.size)]
        used[labels[i]] = True
    subsets = [np.flatnonzero(labels == p).tolist() for p in range(k)]
    return SamplingPartition(subsets, algorithm="random", mode=FIXED_K, meta={"seed": seed})


@lru_cache(maxsize=None)
def stirling2(n: int, k: int) -> int:
    if n == k:
        return 1
    if k == 0 or k > n:
        return 0
    return k * stirling2(n - 1, k) + stirling2(n - 1, k - 1)


def restricted_growth_strings(n: int, k: int):
    """All set partitions of ``range(n)`` into exactly ``k`` blocks, lexicographically."""
    a = [0] * n

    def rec(i, m):
        # m = number of blocks opened so far
        if n - i < k - m:
            return
        if i == n:
            if m == k:
                yield tuple(a)
            return
        for b in range(min(m + 1, k)):
            a[i] = b
            yield from rec(i + 1, max(m, b + 1))

    if n == 0:
        return
    a[0] = 0
    yield from rec(1, 1)


def exhaustive_partition(dataset, decomp, k: int, objective: str = "max_subset_error"
                         ) -> SamplingPartition:
    """Best ``K``-block partition by reconstruction error over all set partitions.

    ``objective`` is ``max_subset_error`` (minimise the worst subset) or
    ``mean_error``. Ties keep the lexicographically first labelling.
    """
    n = decomp.n
    if not 1 <= k <= n:
        raise ConfigError(f"K must lie in [1, {n}], got {k}")
    if objective not in ("max_subset_error", "mean_error"):
        raise ConfigError(f"unknown objective {objective!r}")
    count = stirling2(n, k)
    if n > MAX_EXHAUSTIVE_N or count >= MAX_EXHAUSTIVE_COUNT:
        raise TooLarge(f"{count} partitions of {n} nodes into {k} blocks is too many to enumerate")

    cache: dict[int, float] = {}

    def block_err(mask: int) -> float:
        if mask not in cache:
            cache[mask] = subset_error(dataset, decomp, [i for i in range(n) if mask >> i & 1])
        return cache[mask]

    agg = max if objective == "max_subset_error" else (lambda v: sum(v) / k)
    best, best_val, evaluated = None, math.inf, 0
    for rgs in restricted_growth_strings(n, k):
        masks = [0] * k
        for i, b in enumerate(rgs):
            masks[b] |= 1 << i
        val = agg([block_err(m) for m in masks])
        evaluated += 1
        if val < best_val:
            best, best_val = rgs, val
    subsets = [[i for i in range(n) if best[i] == b] for b in range(k)]
    errs = [block_err(sum(1 << i for i in s)) for s in subsets]
    return SamplingPartition(subsets, algorithm="exhaustive", mode=FIXED_K,
                             meta={"objective": objective, "objective_value": best_val,
                                   "subset_error": errs, "n_evaluated": evaluated})
