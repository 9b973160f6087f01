import csv
import json
import math
import warnings

import numpy as np
import pytest

from repsample.errors import ZeroSignal
from repsample.graph import SimilarityGraph
from repsample.metrics import (evaluate, gft_spectrum, graph_stats, reconstruction_error,
                               save_spectrum_csv, subset_error, tcer, timestamp_errors,
                               total_cumulative_energy)
from repsample.partition import SamplingPartition
from repsample.spectral import decompose

from conftest import random_graph


def hop_distances(a):
    """All-pairs hop counts by repeated boolean matrix products."""
    n = a.shape[0]
    dist = np.full((n, n), np.inf)
    np.fill_diagonal(dist, 0)
    reach = np.eye(n, dtype=bool)
    step = a.astype(int)
    walk = np.eye(n, dtype=int)
    for h in range(1, n):
        walk = (walk @ step > 0).astype(int)
        new = (walk > 0) & ~reach
        dist[new] = h
        reach |= new
    return dist


def test_full_subset_is_band_projection():
    g = random_graph(8, 0.4, np.random.default_rng(0), connected=True)
    d = decompose(g, 3)
    x = np.random.default_rng(1).normal(size=(8, 5))
    resid = x - d.vb @ (d.vb.T @ x)
    ref = np.mean(np.linalg.norm(resid, axis=0) / np.linalg.norm(x, axis=0))
    assert subset_error(x, d, range(8)) == pytest.approx(ref)
    assert subset_error(d.vb @ (d.vb.T @ x), d, range(8)) == pytest.approx(0, abs=1e-12)


def well_conditioned_subset(vb, size, rng):
    while True:
        s = sorted(rng.choice(vb.shape[0], size, replace=False).tolist())
        sv = np.linalg.svd(vb[s], compute_uv=False)
        if sv.min() / sv.max() > 0.2:
            return s


def test_subset_error_matches_least_squares():
    g = random_graph(9, 0.4, np.random.default_rng(2), connected=True)
    d = decompose(g, 2)
    x = np.random.default_rng(3).normal(size=(9, 6))
    s = well_conditioned_subset(d.vb, 4, np.random.default_rng(0))
    coef = np.linalg.lstsq(d.vb[s], x[s], rcond=None)[0]
    xhat = d.vb @ coef
    ref = np.linalg.norm(x - xhat, axis=0) / np.linalg.norm(x, axis=0)
    np.testing.assert_allclose(timestamp_errors(x, d, s), ref, rtol=1e-10)
    assert subset_error(x, d, s) == pytest.approx(ref.mean())


def test_bandlimited_signal_recovered_by_any_good_subset():
    g = random_graph(10, 0.4, np.random.default_rng(4), connected=True)
    d = decompose(g, 3)
    x = d.vb @ np.random.default_rng(5).normal(size=(3, 4))
    s = well_conditioned_subset(d.vb, 4, np.random.default_rng(1))
    assert subset_error(x, d, s) < 1e-10


def test_report_aggregates():
    g = random_graph(8, 0.5, np.random.default_rng(6), connected=True)
    d = decompose(g, 2)
    x = np.random.default_rng(7).normal(size=(8, 5))
    part = SamplingPartition([[0, 1, 2], [3, 4], [5, 6, 7]], algorithm="t", mode="fixed_k")
    rep = reconstruction_error(x, d, part)
    assert rep.k == 3
    assert rep.per_subset_err == pytest.approx([subset_error(x, d, s) for s in part.subsets])
    assert rep.total_err == pytest.approx(sum(rep.per_subset_err))
    assert rep.mean_err == pytest.approx(rep.total_err / 3)
    q = rep.quartiles()
    assert q[0] == min(rep.per_subset_err) and q[4] == max(rep.per_subset_err)
    assert len(rep.raw_errors) == 3 and all(len(r) == 5 for r in rep.raw_errors)


def test_duplicate_rows_give_same_error():
    # a sensor duplicated into two subsets: same reading, same reconstruction
    g = random_graph(6, 0.6, np.random.default_rng(8), connected=True)
    d = decompose(g, 2)
    x = np.random.default_rng(9).normal(size=(6, 4))
    rep = reconstruction_error(x, d, [[0, 1], [0, 1]])
    assert rep.per_subset_err[0] == rep.per_subset_err[1]


def test_zero_timestamps_skipped():
    g = random_graph(6, 0.6, np.random.default_rng(10), connected=True)
    d = decompose(g, 2)
    x = np.random.default_rng(11).normal(size=(6, 4))
    x[:, 2] = 0
    with pytest.warns(RuntimeWarning):
        rep = reconstruction_error(x, d, [[0, 1, 2], [3, 4, 5]])
    assert rep.skipped_timestamps == 1
    keep = [0, 1, 3]
    assert rep.per_subset_err[0] == pytest.approx(subset_error(x[:, keep], d, [0, 1, 2]))
    out = rep.to_dict()
    assert out["raw_errors"][0][2] is None
    json.dumps(out)
    with pytest.raises(ZeroSignal):
        subset_error(np.zeros((6, 3)), d, [0])


def test_tcer_svd_basis_is_zero_and_bounds():
    rng = np.random.default_rng(12)
    x = rng.normal(size=(7, 9))
    u = np.linalg.svd(x)[0]
    assert tcer(x, u) == pytest.approx(0, abs=1e-12)
    for seed in range(5):
        g = random_graph(7, 0.4, np.random.default_rng(seed))
        v = tcer(x, decompose(g, 2))
        assert 0 <= v <= 1
        # any orthonormal basis captures no more cumulative energy than the SVD
        q = np.linalg.qr(np.random.default_rng(seed).normal(size=(7, 7)))[0]
        assert tcer(x, q) >= -1e-12


def test_tcer_hand_value():
    # two sensors, identity basis, x = diag(3, 1): energies 9, 1 in order
    x = np.array([[3.0, 0.0], [0.0, 1.0]])
    assert total_cumulative_energy(x, np.eye(2)) == pytest.approx(2 * 9 + 1)
    assert tcer(x, np.eye(2)) == pytest.approx(0)
    # swapped basis puts the small energy first
    swap = np.array([[0.0, 1.0], [1.0, 0.0]])
    assert tcer(x, swap) == pytest.approx(1 - (2 * 1 + 9) / 19)
    with pytest.raises(ZeroSignal):
        tcer(np.zeros((2, 3)), np.eye(2))


def test_complete_graph_stats():
    a = ~np.eye(4, dtype=bool)
    st = graph_stats(a)
    assert (st.edge_density, st.avg_path_length, st.avg_clustering) == (1.0, 1.0, 1.0)


def test_triangle_with_tail():
    a = np.zeros((4, 4), dtype=bool)
    for i, j in [(0, 1), (1, 2), (0, 2), (0, 3)]:
        a[i, j] = a[j, i] = True
    st = graph_stats(SimilarityGraph(a, "x", 0.0))
    assert st.edge_density == pytest.approx(4 / 6)
    assert st.avg_clustering == pytest.approx((1 / 3 + 1 + 1 + 0) / 4)
    # pair distances: 1,1,1,1,2,2
    assert st.avg_path_length == pytest.approx(8 / 6)


@pytest.mark.parametrize("seed", range(5))
def test_path_length_oracle(seed):
    g = random_graph(11, 0.3, np.random.default_rng(seed), connected=True)
    dist = hop_distances(g.adjacency)
    off = dist[~np.eye(11, dtype=bool)]
    assert graph_stats(g).avg_path_length == pytest.approx(off.mean())


def test_disconnected_path_length_is_inf():
    a = np.zeros((4, 4), dtype=bool)
    a[0, 1] = a[1, 0] = a[2, 3] = a[3, 2] = True
    st = graph_stats(a)
    assert math.isinf(st.avg_path_length)
    assert st.to_dict()["avg_path_length"] == "inf"
    assert json.loads(json.dumps(st.to_dict()))["avg_path_length"] == "inf"


def test_spectrum_and_csv(tmp_path):
    g = random_graph(6, 0.5, np.random.default_rng(13), connected=True)
    d = decompose(g, 2)
    x = np.random.default_rng(14).normal(size=(6, 3))
    spec = gft_spectrum(d, x)
    assert len(spec) == 6
    ref = np.abs(d.eigenvectors.T @ x).mean(axis=1)
    np.testing.assert_allclose([a for _, a in spec], ref)
    save_spectrum_csv(spec, tmp_path / "s.csv")
    rows = list(csv.reader(open(tmp_path / "s.csv")))
    assert rows[0] == ["index", "eigenvalue", "mean_amplitude"] and len(rows) == 7
    assert float(rows[3][2]) == spec[2][1]


def test_evaluate_combines():
    g = random_graph(8, 0.5, np.random.default_rng(15), connected=True)
    d = decompose(g, 2)
    x = np.random.default_rng(16).normal(size=(8, 4))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        rep = evaluate(x, g, d, [[0, 2, 4, 6], [1, 3, 5, 7]])
    assert rep.tcer == pytest.approx(tcer(x, d))
    assert rep.edge_density == pytest.approx(g.achieved_edge_density if g.achieved_edge_density
                                             is not None else graph_stats(g).edge_density)
    assert rep.avg_clustering == graph_stats(g).avg_clustering
    d2 = rep.to_dict(include_raw=False)
    assert "raw_errors" not in d2 and d2["k"] == 2
