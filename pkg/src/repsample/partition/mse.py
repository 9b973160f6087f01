"""MSE-driven partitioners: JIP (sequential, error bounded) and SIP (K at once)."""
from __future__ import annotations

import math

import numpy as np

from ..errors import ConfigError, InfeasibleEpsilon
from ..spectral import DEFAULT_ETA, MseState, SpectralDecomposition, mse_of_subset
from .base import FIXED_K, MAX_K, SamplingPartition


def jip_partition(decomp: SpectralDecomposition, epsilon: float, eta=DEFAULT_ETA
                  ) -> SamplingPartition:
    """Grow subsets one after another until each has MSE within ``epsilon``.

    Candidates are kept sorted by single-node MSE, largest first. A subset is
    seeded with the best remaining node (smallest single-node MSE). While its
    MSE exceeds ``epsilon`` the first candidate in list order that would bring
    it below ``epsilon`` completes it; failing that, the candidate with the
    smallest resulting MSE is added. A final subset that never meets the bound
    is dealt round-robin to the earlier ones, which are then flagged.
    """
    if not epsilon > 0:
        raise ConfigError("epsilon must be > 0")
    n = decomp.n
    st0 = MseState.initial(decomp, eta)
    single = st0.candidate_mses(range(n))
    # ascending by (mse, index), then reversed: pop() yields the smallest MSE
    order = np.lexsort((np.arange(n), single))[::-1].tolist()

    subsets, mses, tail = [], [], None
    while order:
        u = order.pop()
        state = st0.add(u)
        cur = single[u]
        while cur > epsilon and order:
            vals = state.candidate_mses(order)
            hits = np.flatnonzero(vals < epsilon)
            j = int(hits[0]) if hits.size else int(np.argmin(vals))
            cur = float(vals[j])
            state = state.add(order.pop(j))
        if cur <= epsilon:
            subsets.append(state.selected)
            mses.append(float(cur))
        else:
            tail = state.selected

    flagged = []
    if tail:
        if not subsets:
            raise InfeasibleEpsilon(
                f"all {n} nodes together reach MSE {cur:.6g} > epsilon {epsilon:.6g}",
                certificate=float(cur))
        for i, v in enumerate(tail):
            p = i % len(subsets)
            subsets[p].append(v)
            if p not in flagged:
                flagged.append(p)
        for p in flagged:
            mses[p] = mse_of_subset(decomp, eta, subsets[p])
    return SamplingPartition(subsets, algorithm="jip", mode=MAX_K, per_subset_mse=mses,
                             epsilon=epsilon, flagged=sorted(flagged),
                             meta={"leftover": len(tail or [])})


def jip_partition_k(decomp: SpectralDecomposition, k: int, eta=DEFAULT_ETA,
                    n_iter: int = 100) -> SamplingPartition:
    """JIP steered to ``K`` subsets by bisection on ``epsilon``.

    When no ``epsilon`` gives exactly ``K`` subsets, the closest run with more
    than ``K`` is used and its trailing subsets are dealt round-robin to the
    first ``K`` (those are flagged).
    """
    n = decomp.n
    if not 1 <= k <= n:
        raise ConfigError(f"K must lie in [1, {n}], got {k}")
    single = MseState.initial(decomp, eta).candidate_mses(range(n))
    lo = mse_of_subset(decomp, eta, range(n)) * (1 + 1e-12)
    hi = float(single.max()) * (1 + 1e-9)

    def run(eps):
        try:
            return jip_partition(decomp, eps, eta)
        except InfeasibleEpsilon:
            return None

    best = run(hi)
    if best.k != k:
        lo_log, hi_log = math.log(lo), math.log(hi)
        for _ in range(n_iter):
            mid = math.exp((lo_log + hi_log) / 2)
            part = run(mid)
            if part is None or part.k < k:
                lo_log = math.log(mid)
            else:
                hi_log = math.log(mid)
                best = part
                if part.k == k:
                    break
    subsets = [list(s) for s in best.subsets]
    flagged = set(best.flagged)
    extra = subsets[k:]
    subsets = subsets[:k]
    for i, v in enumerate(v for s in extra for v in s):
        subsets[i % k].append(v)
        flagged.add(i % k)
    mses = [mse_of_subset(decomp, eta, s) for s in subsets]
    return SamplingPartition(subsets, algorithm="jip", mode=FIXED_K, per_subset_mse=mses,
                             epsilon=best.epsilon, flagged=sorted(flagged),
                             meta={"merged_subsets": len(extra)})


def sip_partition(decomp: SpectralDecomposition, k: int, eta=DEFAULT_ETA) -> SamplingPartition:
    """Seed ``K`` subsets with the best single nodes, then always feed the worst subset."""
    n = decomp.n
    if not 1 <= k <= n:
        raise ConfigError(f"K must lie in [1, {n}], got {k}")
    st0 = MseState.initial(decomp, eta)
    single = st0.candidate_mses(range(n))
    seeds = np.lexsort((np.arange(n), single))[:k].tolist()
    states = [st0.add(s) for s in seeds]
    mses = [float(single[s]) for s in seeds]
    remaining = sorted(set(range(n)) - set(seeds))
    while remaining:
        p = int(np.argmax(mses))
        vals = states[p].candidate_mses(remaining)
        j = int(np.argmin(vals))
        states[p] = states[p].add(remaining.pop(j))
        mses[p] = float(vals[j])
    return SamplingPartition([s.selected for s in states], algorithm="sip", mode=FIXED_K,
                             per_subset_mse=mses)
