import pytest

from repsample.autoselect import AutoSelectConfig, Recommendation, recommend, run_auto
from repsample.dataset import SyntheticSpec, generate_stratified, generate_ws_bandlimited
from repsample.errors import CalibrationFailed, ConfigError
from repsample.metrics import reconstruction_error
from repsample.partition import run_sampler
from repsample.similarity import GraphBuildConfig, build_graph
from repsample.spectral import decompose, default_bandwidth


@pytest.mark.parametrize("n,density,expected", [
    (74, 0.75, ("haar", ("srel", "frob"))),
    (74, 0.25, ("haar", ("smmr", "frob"))),
    (100, 0.25, ("nei", ("smmr", "frob"))),
    (100, 0.75, ("haar", ("srel", "frob"))),
    # boundaries: n = th_n is "large", density = th_e is "dense"
    (90, 0.39, ("nei", ("smmr", "frob"))),
    (89, 0.40, ("haar", ("srel", "frob"))),
    (90, 0.40, ("haar", ("srel", "frob"))),
])
def test_quadrants(n, density, expected):
    rec = recommend(n, density)
    assert (rec.phase1, rec.phase2) == expected


def test_recommend_is_pure_and_configurable():
    assert recommend(50, 0.3) == recommend(50, 0.3)
    rec = recommend(50, 0.3, AutoSelectConfig(th_n=40, th_e=0.2))
    assert rec == Recommendation("haar", ("srel", "frob"))
    assert Recommendation("nei", ("smmr",)).method == "knn"
    with pytest.raises(ConfigError):
        recommend(50, 1.0)
    with pytest.raises(ConfigError):
        recommend(50, 0.5, AutoSelectConfig(th_e=0))


def test_smoke_stratified():
    ds, _ = generate_stratified(SyntheticSpec("stratified", n=16, t=24, seed=1, k_true=3))
    res = run_auto(ds, 0.5, k=3)
    graph, part, report = res
    assert part.k == 3 and part.violations(16) == []
    assert res.provenance["executed"] == "srel" and res.provenance["method"] == "haar"
    assert abs(graph.achieved_edge_density - 0.5) <= 0.05
    assert report.k == 3 and 0 <= report.tcer <= 1


def test_fallback_recorded():
    # eight sensors with K = 8: the stratified sampler runs out of community
    # members before seeding every subset, so Frob takes over
    ds, _ = generate_stratified(SyntheticSpec("stratified", n=8, t=16, seed=0, k_true=2))
    res = run_auto(ds, 0.3, k=8)
    prov = res.provenance
    assert prov["executed"] == "frob"
    assert prov["attempts"][0]["sampler"] == "smmr"
    assert "DegenerateCommunities" in prov["attempts"][0]["error"]
    assert prov["attempts"][1] == {"sampler": "frob", "error": None}


def test_epsilon_mode_and_given_graph():
    ds, g = generate_ws_bandlimited(SyntheticSpec("ws_bandlimited", n=30, t=10, seed=3, bandwidth=4))
    res = run_auto(ds, 0.3, epsilon=0.5, bandwidth=4, graph=g)
    assert res.provenance["method"] == "given" and res.partition.mode == "max_k"
    assert res.partition.violations(30) == []


def test_errors_propagate():
    ds, _ = generate_stratified(SyntheticSpec("stratified", n=12, t=8, seed=0, k_true=2))
    with pytest.raises(ConfigError):
        run_auto(ds, 0.5)
    with pytest.raises(ConfigError):
        run_auto(ds, 0.5, k=2, epsilon=0.1)
    # with one possible edge the density is 0 or 1, never within 0.05 of 0.5
    two, _ = generate_stratified(SyntheticSpec("stratified", n=2, t=8, seed=0, k_true=1))
    with pytest.raises(CalibrationFailed):
        run_auto(two, 0.5, k=1)


def test_auto_matches_its_manual_combination():
    # the pipeline's Err is the sweep entry for the combination it executed,
    # so it can never beat the best manual combination
    ds, _ = generate_stratified(SyntheticSpec("stratified", n=24, t=20, seed=4, k_true=4))
    density, k = 0.5, 4
    res = run_auto(ds, density, k=k)
    b = default_bandwidth(ds.n, k)
    sweep = {}
    for method in ("corr", "deconv", "dtw", "haar", "knn"):
        try:
            g = build_graph(ds, GraphBuildConfig(method, target_edge_density=density))
        except CalibrationFailed:
            continue
        d = decompose(g, b)
        for sampler in ("srel", "smmr", "semmr", "msv", "jip", "sip", "frob", "par"):
            part = run_sampler(sampler, g, d, k=k, dataset=ds)
            sweep[method, sampler] = reconstruction_error(ds, d, part).mean_err
    key = (res.provenance["method"], res.provenance["executed"])
    assert sweep[key] == pytest.approx(res.report.mean_err, rel=1e-12)
    assert res.report.mean_err >= min(sweep.values())
