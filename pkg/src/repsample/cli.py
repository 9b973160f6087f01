"""Command-line entry point: ``repsample <command> [--manifest run.json] [flags]``.

Every command reads an optional JSON manifest whose keys match the long flag
names (dashes become underscores); flags given on the command line win.
Exit codes: 0 success, 2 usage or configuration error, 3 computation error.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .autoselect import AutoSelectConfig, run_auto
from .dataset import (COLUMNS_ARE_SENSORS, ROWS_ARE_SENSORS, SyntheticSpec, generate_stratified,
                      generate_ws_bandlimited, load_csv, save_csv)
from .errors import ConfigError, InfeasibleEpsilon, RepSampleError
from .graph import METHODS, load_graph_json, save_edge_csv, save_graph_json
from .metrics import evaluate, gft_spectrum, graph_stats, save_spectrum_csv, tcer
from .partition import SAMPLERS, exhaustive_partition, run_sampler, save_partition_json
from .similarity import GraphBuildConfig, build_graph
from .spectral import DEFAULT_ETA, decompose, default_bandwidth

WORKERS_ENV = "REPSAMPLE_WORKERS"
BENCH_DENSITIES = (0.20, 0.40, 0.60, 0.75)
BENCH_MAX_WORK = 5_000_000

DEFAULTS = {
    "layout": ROWS_ARE_SENSORS,
    "dtw_radius": 1,
    "gsp_alpha": 1.0,
    "gsp_beta": 1.0,
    "gsp_max_iter": 20000,
    "gsp_tol": 1e-6,
    "time_fraction": 1.0,
    "seed": 0,
    "eta": DEFAULT_ETA,
    "mmr_beta": 0.4,
    "objective": "max_subset_error",
    "th_n": 90,
    "th_e": 0.40,
    "out": ".",
}


class _Exit(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------------------
# manifest handling

def _merge(args: argparse.Namespace) -> dict:
    m = dict(DEFAULTS)
    if args.manifest:
        path = Path(args.manifest)
        if not path.is_file():
            raise _Exit(2, f"manifest not found: {path}")
        try:
            loaded = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise _Exit(2, f"manifest {path} is not valid JSON: {exc}") from None
        m.update({k.replace("-", "_"): v for k, v in loaded.items()})
    for k, v in vars(args).items():
        if k in ("func", "manifest") or v is None:
            continue
        m[k] = v
    m["command"] = args.command
    return m


def _provenance(m: dict) -> dict:
    return {"manifest": {k: m[k] for k in sorted(m)}, "version": __version__}


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n",
                    encoding="utf-8")


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serialisable: {type(o).__name__}")


def _clean(x):
    """JSON-safe copy: inf and nan become strings / null."""
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return None
    return x


def _outdir(m: dict) -> Path:
    out = Path(m["out"])
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "manifest.json", _clean(_provenance(m)))
    return out


def _parse_int_list(text) -> list[int]:
    if isinstance(text, list):
        return [int(v) for v in text]
    text = str(text)
    if ".." in text:
        a, b = text.split("..")
        return list(range(int(a), int(b) + 1))
    return [int(v) for v in text.split(",") if v.strip()]


def _parse_list(text, cast=str) -> list:
    if isinstance(text, list):
        return [cast(v) for v in text]
    return [cast(v.strip()) for v in str(text).split(",") if v.strip()]


# ---------------------------------------------------------------------------
# shared steps

def _dataset(m: dict):
    if m.get("input"):
        path = Path(m["input"])
        if not path.is_file():
            raise _Exit(2, f"input file not found: {path}")
        return load_csv(path, m["layout"]), None
    syn = m.get("synthetic")
    if syn:
        spec = _spec(syn)
        if spec.kind == "ws_bandlimited":
            ds, g = generate_ws_bandlimited(spec)
            return ds, g
        ds, _ = generate_stratified(spec)
        return ds, None
    raise _Exit(2, "no dataset: give --input or a 'synthetic' manifest entry")


def _spec(d: dict) -> SyntheticSpec:
    d = dict(d)
    if "mean_gap_range" in d:
        d["mean_gap_range"] = tuple(d["mean_gap_range"])
    try:
        return SyntheticSpec(**d)
    except TypeError as exc:
        raise ConfigError(f"bad synthetic spec: {exc}") from None


def _graph_config(m: dict, method=None, density=None) -> GraphBuildConfig:
    method = method or m.get("method")
    if method is None:
        raise ConfigError("no graph method given (--method)")
    density = density if density is not None else m.get("density")
    thr = m.get("threshold")
    if thr is not None:
        thr = float(thr)
    return GraphBuildConfig(
        method=method, target_edge_density=density if thr is None else None,
        explicit_threshold=thr if density is None else None,
        dtw_radius=int(m["dtw_radius"]), haar_keep=m.get("haar_keep"), knn_k=m.get("knn_k"),
        gsp_alpha=float(m["gsp_alpha"]), gsp_beta=float(m["gsp_beta"]),
        gsp_max_iter=int(m["gsp_max_iter"]), gsp_tol=float(m["gsp_tol"]))


def _graph(m: dict, ds, given=None):
    if m.get("graph"):
        path = Path(m["graph"])
        if not path.is_file():
            raise _Exit(2, f"graph file not found: {path}")
        g = load_graph_json(path)
        if g.n != ds.n:
            raise ConfigError(f"graph has {g.n} nodes but the dataset has {ds.n} sensors")
        return g
    if given is not None and m.get("method") in (None, "given"):
        return given
    return build_graph(ds.prefix(float(m["time_fraction"])), _graph_config(m))


def _stats_row(g, ds, decomp) -> dict:
    st = graph_stats(g)
    return {"method": g.method, "threshold": g.threshold, "E_d": st.edge_density,
            "avg_path_length": st.avg_path_length, "avg_clustering": st.avg_clustering,
            "tcer": tcer(ds, decomp)}


def _write_rows(path: Path, rows: list[dict], columns: list[str]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=columns, extrasaction="ignore")
        w.writeheader()
        for r in rows:
            w.writerow({k: _fmt(r.get(k)) for k in columns})


def _fmt(v):
    if isinstance(v, float):
        if math.isinf(v):
            return "inf"
        if math.isnan(v):
            return "nan"
        return repr(v)
    return "" if v is None else v


def _bandwidth(m, n, k=None):
    b = m.get("bandwidth")
    return int(b) if b else default_bandwidth(n, k)


# ---------------------------------------------------------------------------
# commands

def cmd_generate(m: dict) -> int:
    keys = ("kind", "n", "t", "seed", "k_true", "bandwidth", "rewire_prob", "noise_sigma")
    syn = dict(m.get("synthetic") or {})
    syn.update({k: m[k] for k in keys if m.get(k) is not None and k != "seed"})
    syn.setdefault("seed", m["seed"])
    if "kind" not in syn or "n" not in syn or "t" not in syn:
        raise ConfigError("generate needs --kind, --n and --t")
    spec = _spec(syn)
    out = _outdir(dict(m, synthetic=syn))
    prov = _clean(_provenance(dict(m, synthetic=syn)))
    if spec.kind == "ws_bandlimited":
        ds, g = generate_ws_bandlimited(spec)
        save_graph_json(g, out / "graph.json", prov)
    else:
        ds, part = generate_stratified(spec)
        save_partition_json(part, out / "partition.json", prov)
    save_csv(ds, out / "dataset.csv")
    print(f"wrote {out / 'dataset.csv'} ({ds.n} sensors x {ds.t} timestamps)")
    return 0


def cmd_build_graph(m: dict) -> int:
    ds, given = _dataset(m)
    g = _graph(m, ds, given)
    out = _outdir(m)
    prov = _clean(_provenance(m))
    save_graph_json(g, out / "graph.json", prov)
    save_edge_csv(g, out / "edges.csv")
    decomp = decompose(g, _bandwidth(m, g.n))
    _write_rows(out / "graph_stats.csv", [_stats_row(g, ds, decomp)],
                ["method", "threshold", "E_d", "avg_path_length", "avg_clustering", "tcer"])
    save_spectrum_csv(gft_spectrum(decomp, ds), out / "spectrum.csv")
    print(f"{g.method}: {g.n_edges} edges, E_d={g.achieved_edge_density:.4f}, "
          f"threshold={g.threshold:.6g}")
    return 0


def _partition_once(m, ds, g, k, eps):
    decomp = decompose(g, _bandwidth(m, g.n, k))
    part = run_sampler(m["sampler"], g, decomp, k=k, epsilon=eps, dataset=ds,
                       eta=float(m["eta"]), seed=int(m["seed"]), mmr_beta=float(m["mmr_beta"]),
                       par_maximize=bool(m.get("par_maximize")))
    return part, evaluate(ds, g, decomp, part)


def cmd_partition(m: dict) -> int:
    if m.get("sampler") not in SAMPLERS:
        raise ConfigError(f"--sampler must be one of {SAMPLERS}")
    ds, given = _dataset(m)
    ks = _parse_int_list(m["k_sweep"]) if m.get("k_sweep") else None
    k = m.get("k")
    eps = m.get("epsilon")
    if ks is None and (k is None) == (eps is None):
        raise ConfigError("give exactly one of --k / --epsilon / --k-sweep")
    for kk in ks or ([int(k)] if k is not None else []):
        if not 1 <= kk <= ds.n:
            raise ConfigError(f"K={kk} outside [1, {ds.n}]")
    if eps is not None and not float(eps) > 0:
        raise ConfigError("epsilon must be > 0")
    g = _graph(m, ds, given)
    out = _outdir(m)
    prov = _clean(_provenance(m))

    if ks:
        rows, prev = [], None
        for kk in ks:
            part, rep = _partition_once(m, ds, g, kk, None)
            q = rep.quartiles()
            rows.append({"K": kk, "Err": rep.mean_err, "TErr": rep.total_err,
                         "samserr_min": q[0], "samserr_q1": q[1], "samserr_median": q[2],
                         "samserr_q3": q[3], "samserr_max": q[4],
                         "trend_violation": prev is not None and rep.mean_err < prev})
            prev = rep.mean_err
            save_partition_json(part, out / f"partition_K{kk}.json", prov)
        _write_rows(out / "sweep.csv", rows, list(rows[0]))
        bad = [r["K"] for r in rows if r["trend_violation"]]
        if bad:
            print(f"note: Err decreased at K={bad} (expected a non-decreasing trend)")
        print(f"wrote {out / 'sweep.csv'} ({len(rows)} rows)")
        return 0

    part, rep = _partition_once(m, ds, g, None if k is None else int(k),
                                None if eps is None else float(eps))
    save_partition_json(part, out / "partition.json", prov)
    _write_json(out / "report.json", _clean(dict(rep.to_dict(), **prov)))
    _write_rows(out / "report.csv",
                [{"subset": p, "size": len(s), "samserr": e}
                 for p, (s, e) in enumerate(zip(part.subsets, rep.per_subset_err))],
                ["subset", "size", "samserr"])
    print(f"{part.algorithm}: K={part.k}, Err={rep.mean_err:.6g}, TErr={rep.total_err:.6g}")
    return 0


def cmd_auto(m: dict) -> int:
    ds, given = _dataset(m)
    density = m.get("density")
    if density is None:
        raise ConfigError("auto needs --density")
    density = float(density)
    if not 0 < density < 1:
        raise ConfigError("--density must lie in (0, 1)")
    k, eps = m.get("k"), m.get("epsilon")
    cfg = AutoSelectConfig(int(m["th_n"]), float(m["th_e"]))
    res = run_auto(ds, density, k=None if k is None else int(k),
                   epsilon=None if eps is None else float(eps), config=cfg,
                   bandwidth=m.get("bandwidth"), eta=float(m["eta"]), seed=int(m["seed"]),
                   graph_dataset=ds.prefix(float(m["time_fraction"])))
    out = _outdir(m)
    prov = _clean(_provenance(m))
    save_graph_json(res.graph, out / "graph.json", prov)
    save_partition_json(res.partition, out / "partition.json", prov)
    _write_json(out / "report.json", _clean(dict(res.report.to_dict(), **prov,
                                                 auto=res.provenance)))
    p = res.provenance
    print(f"phase1={p['phase1']} phase2={p['executed']} K={res.partition.k} "
          f"Err={res.report.mean_err:.6g}")
    return 0


def cmd_exhaustive(m: dict) -> int:
    ds, given = _dataset(m)
    if m.get("k") is None:
        raise ConfigError("exhaustive needs --k")
    k = int(m["k"])
    g = _graph(m, ds, given)
    decomp = decompose(g, _bandwidth(m, g.n, k))
    part = exhaustive_partition(ds, decomp, k, m["objective"])
    rep = evaluate(ds, g, decomp, part)
    out = _outdir(m)
    prov = _clean(_provenance(m))
    save_partition_json(part, out / "partition.json", prov)
    _write_json(out / "report.json", _clean(dict(rep.to_dict(), **prov)))
    print(f"exhaustive: {part.meta['n_evaluated']} partitions, "
          f"{m['objective']}={part.meta['objective_value']:.6g}")
    return 0


BENCH_COLUMNS = ["dataset", "method", "E_d_target", "E_d_achieved", "time_fraction", "sampler",
                 "K", "samserr_min", "samserr_q1", "samserr_median", "samserr_q3", "samserr_max",
                 "Err", "tcer", "wall_time_ms", "status"]


def _bench_cell(job) -> list[dict]:
    m, ds, method, density, samplers, ks, name = job
    base = {"dataset": name, "method": method, "E_d_target": density,
            "time_fraction": float(m["time_fraction"])}
    try:
        g = build_graph(ds.prefix(float(m["time_fraction"])), _graph_config(m, method, density))
    except RepSampleError as exc:
        return [dict(base, sampler=s, K=k, status=f"graph failed: {type(exc).__name__}: {exc}")
                for k in ks for s in samplers]
    rows = []
    for k in ks:
        decomp = decompose(g, _bandwidth(m, g.n, k))
        t_cer = tcer(ds, decomp)
        for s in samplers:
            row = dict(base, E_d_achieved=g.achieved_edge_density, sampler=s, K=k, tcer=t_cer)
            t0 = time.perf_counter()
            try:
                part = run_sampler(s, g, decomp, k=k, dataset=ds, eta=float(m["eta"]),
                                   seed=int(m["seed"]), mmr_beta=float(m["mmr_beta"]))
                rep = evaluate(ds, g, decomp, part)
            except RepSampleError as exc:
                row["status"] = f"failed: {type(exc).__name__}: {exc}"
            else:
                q = rep.quartiles()
                row.update(samserr_min=q[0], samserr_q1=q[1], samserr_median=q[2],
                           samserr_q3=q[3], samserr_max=q[4], Err=rep.mean_err, status="ok")
            row["wall_time_ms"] = round((time.perf_counter() - t0) * 1000, 3)
            rows.append(row)
    return rows


def cmd_bench(m: dict) -> int:
    samplers = _parse_list(m.get("samplers", ",".join(s for s in SAMPLERS)))
    if not samplers:
        raise ConfigError("empty sampler list")
    bad = [s for s in samplers if s not in SAMPLERS]
    if bad:
        raise ConfigError(f"unknown samplers {bad}")
    methods = _parse_list(m.get("methods", "dtw,haar,knn,gsp"))
    if not methods or any(x not in METHODS for x in methods):
        raise ConfigError(f"--methods must be a non-empty subset of {METHODS}")
    densities = _parse_list(m.get("densities", ",".join(map(str, BENCH_DENSITIES))), float)
    ks = _parse_int_list(m.get("ks", "5,7,10,13"))
    ds, _ = _dataset(m)
    ks = [k for k in ks if 1 <= k <= ds.n]
    if not ks:
        raise ConfigError("no K value fits the dataset size")
    work = ds.n ** 2 * len(methods) * len(densities) * len(samplers) * len(ks)
    if work > BENCH_MAX_WORK:
        raise ConfigError(f"grid too large for n={ds.n} ({work} > {BENCH_MAX_WORK}); shrink it")
    name = Path(m["input"]).stem if m.get("input") else m.get("synthetic", {}).get("kind", "data")
    clean_m = {k: v for k, v in m.items() if k not in ("synthetic",)}
    jobs = [(clean_m, ds, meth, d, samplers, ks, name) for meth in methods for d in densities]
    workers = int(os.environ.get(WORKERS_ENV, "1") or 1)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_bench_cell, jobs))
    else:
        results = [_bench_cell(j) for j in jobs]
    rows = [r for cell in results for r in cell]
    out = _outdir(m)
    _write_rows(out / "bench.csv", rows, BENCH_COLUMNS)
    failed = sum(r.get("status") != "ok" for r in rows)
    print(f"wrote {out / 'bench.csv'} ({len(rows)} rows, {failed} failed)")
    return 0


# ---------------------------------------------------------------------------
# argument parsing

def _common(p: argparse.ArgumentParser, graph=True) -> None:
    p.add_argument("--manifest", help="JSON manifest; flags override its fields")
    p.add_argument("--input", help="dataset CSV")
    p.add_argument("--layout", choices=(ROWS_ARE_SENSORS, COLUMNS_ARE_SENSORS))
    p.add_argument("--out", help="output directory")
    p.add_argument("--seed", type=int)
    p.add_argument("--time-fraction", type=float, dest="time_fraction",
                   help="build the graph from this leading fraction of each series")
    if graph:
        p.add_argument("--graph", help="precomputed graph JSON")
        p.add_argument("--method", choices=METHODS)
        p.add_argument("--density", type=float, help="target edge density")
        p.add_argument("--threshold", type=float, help="explicit edge threshold")
        p.add_argument("--dtw-radius", type=int, dest="dtw_radius")
        p.add_argument("--haar-keep", type=int, dest="haar_keep")
        p.add_argument("--knn-k", type=int, dest="knn_k")
        p.add_argument("--gsp-alpha", type=float, dest="gsp_alpha")
        p.add_argument("--gsp-beta", type=float, dest="gsp_beta")
        p.add_argument("--bandwidth", type=int)
        p.add_argument("--eta", type=float)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="repsample", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"repsample {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic dataset")
    _common(p, graph=False)
    p.add_argument("--kind", choices=("ws_bandlimited", "stratified"))
    p.add_argument("--n", type=int)
    p.add_argument("--t", type=int)
    p.add_argument("--k-true", type=int, dest="k_true")
    p.add_argument("--bandwidth", type=int)
    p.add_argument("--rewire-prob", type=float, dest="rewire_prob")
    p.add_argument("--noise-sigma", type=float, dest="noise_sigma")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("build-graph", help="build a similarity graph and its statistics")
    _common(p)
    p.set_defaults(func=cmd_build_graph)

    p = sub.add_parser("partition", help="run one sampler and evaluate it")
    _common(p)
    p.add_argument("--sampler", choices=SAMPLERS)
    p.add_argument("--k", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--k-sweep", dest="k_sweep", help="e.g. 5..13 or 5,7,10")
    p.add_argument("--mmr-beta", type=float, dest="mmr_beta")
    p.add_argument("--par-maximize", action="store_true", default=None, dest="par_maximize")
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("auto", help="recommended graph method and sampler, end to end")
    _common(p, graph=False)
    p.add_argument("--density", type=float)
    p.add_argument("--k", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--bandwidth", type=int)
    p.add_argument("--eta", type=float)
    p.add_argument("--th-n", type=int, dest="th_n")
    p.add_argument("--th-e", type=float, dest="th_e")
    p.set_defaults(func=cmd_auto)

    p = sub.add_parser("bench", help="grid of methods x densities x samplers x K")
    _common(p)
    p.add_argument("--methods")
    p.add_argument("--densities")
    p.add_argument("--samplers")
    p.add_argument("--ks")
    p.add_argument("--mmr-beta", type=float, dest="mmr_beta")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("exhaustive", help="optimal K-partition by enumeration (n <= 12)")
    _common(p)
    p.add_argument("--k", type=int)
    p.add_argument("--objective", choices=("max_subset_error", "mean_error"))
    p.set_defaults(func=cmd_exhaustive)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        m = _merge(args)
        return args.func(m)
    except _Exit as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (ConfigError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except InfeasibleEpsilon as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(f"certificate: smallest attainable error {exc.certificate}", file=sys.stderr)
        return 3
    except RepSampleError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
