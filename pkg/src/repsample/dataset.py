"""Sensor time-series datasets: CSV ingestion and synthetic generators."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import networkx as nx
import numpy as np

from .errors import InvalidSpec, MissingValue, ParseError, TooSmall
from .graph import SimilarityGraph
from .partition.base import SamplingPartition
from .spectral import decompose, gft

ROWS_ARE_SENSORS = "rows_are_sensors"
COLUMNS_ARE_SENSORS = "columns_are_sensors"


@dataclass(frozen=True)
class TimeSeriesDataset:
    """``n`` sensors by ``t`` timestamps. Row order is the canonical node order."""

    sensor_ids: tuple[str, ...]
    values: np.ndarray
    sample_period: str | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.ndim != 2:
            raise TooSmall("values must be a 2-D matrix")
        n, t = vals.shape
        if n < 2 or t < 2:
            raise TooSmall(f"need at least 2 sensors and 2 timestamps, got {n}x{t}")
        bad = np.argwhere(~np.isfinite(vals))
        if bad.size:
            r, c = bad[0]
            raise MissingValue(f"missing value at sensor row {r}, timestamp column {c}")
        ids = tuple(str(s) for s in self.sensor_ids)
        if len(ids) != n:
            raise ParseError(f"{len(ids)} sensor ids for {n} rows")
        if len(set(ids)) != n:
            raise ParseError("sensor ids must be unique")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "sensor_ids", ids)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def t(self) -> int:
        return self.values.shape[1]

    @classmethod
    def from_array(cls, values, sensor_ids=None, **kw) -> "TimeSeriesDataset":
        values = np.asarray(values, dtype=float)
        if sensor_ids is None:
            sensor_ids = [f"S{i + 1}" for i in range(values.shape[0])]
        return cls(tuple(sensor_ids), values, **kw)

    def prefix(self, fraction: float) -> "TimeSeriesDataset":
        """Keep the first ``ceil(fraction * t)`` timestamps (at least 2)."""
        if not 0 < fraction <= 1:
            raise InvalidSpec("time fraction must lie in (0, 1]")
        keep = max(2, math.ceil(fraction * self.t))
        return replace(self, values=self.values[:, :keep])


def _parse_cell(cell: str, r: int, c: int) -> float:
    s = cell.strip()
    if s == "" or s.lower() in ("nan", "na", "null"):
        raise MissingValue(f"missing value at row {r}, column {c}")
    try:
        v = float(s)
    except ValueError:
        raise ParseError(f"non-numeric cell {cell!r} at row {r}, column {c}") from None
    if math.isnan(v):
        raise MissingValue(f"missing value at row {r}, column {c}")
    return v


def _is_number(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def load_csv(path, layout: str = ROWS_ARE_SENSORS) -> TimeSeriesDataset:
    """Read a dataset from CSV.

    ``rows_are_sensors``: one line per sensor, ``id,v1,...,vt``; an optional
    header line (non-numeric value cells) is skipped.
    ``columns_are_sensors``: a header of sensor ids, then one line per timestamp.
    """
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise TooSmall(f"{path} is empty")

    if layout == ROWS_ARE_SENSORS:
        if not all(_is_number(c) for c in rows[0][1:] if c.strip()):
            rows = rows[1:]
        ids = [r[0].strip() for r in rows]
        width = max(len(r) for r in rows)
        values = []
        for ri, r in enumerate(rows):
            if len(r) != width:
                raise MissingValue(f"row {ri} ({r[0]}) has {len(r) - 1} values, expected {width - 1}")
            values.append([_parse_cell(c, ri, ci) for ci, c in enumerate(r[1:])])
        values = np.array(values, dtype=float).reshape(len(rows), width - 1)
    elif layout == COLUMNS_ARE_SENSORS:
        ids = [c.strip() for c in rows[0]]
        body = rows[1:]
        values = []
        for ri, r in enumerate(body):
            if len(r) != len(ids):
                raise MissingValue(f"timestamp row {ri} has {len(r)} cells, expected {len(ids)}")
            values.append([_parse_cell(c, ri, ci) for ci, c in enumerate(r)])
        values = np.array(values, dtype=float).reshape(len(body), len(ids)).T
    else:
        raise ParseError(f"unknown layout {layout!r}")
    return TimeSeriesDataset(tuple(ids), values)


def save_csv(dataset: TimeSeriesDataset, path, layout: str = ROWS_ARE_SENSORS) -> None:
    fmt = lambda v: format(float(v), ".12g")  # noqa: E731
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        if layout == ROWS_ARE_SENSORS:
            w.writerow(["sensor_id"] + [f"t{k}" for k in range(dataset.t)])
            for sid, row in zip(dataset.sensor_ids, dataset.values):
                w.writerow([sid] + [fmt(v) for v in row])
        elif layout == COLUMNS_ARE_SENSORS:
            w.writerow(dataset.sensor_ids)
            for col in dataset.values.T:
                w.writerow([fmt(v) for v in col])
        else:
            raise ParseError(f"unknown layout {layout!r}")


@dataclass(frozen=True)
class SyntheticSpec:
    kind: str
    n: int
    t: int
    seed: int = 0
    k_true: int | None = None
    bandwidth: int | None = None
    rewire_prob: float = 0.5
    ws_neighbors: int = 4
    mean_gap_range: tuple[float, float] = (3.0, 5.0)
    noise_sigma: float = 0.5
    base_level: float = 20.0

    def validate(self) -> None:
        if self.kind not in ("ws_bandlimited", "stratified"):
            raise InvalidSpec(f"unknown synthetic kind {self.kind!r}")
        if self.n < 2 or self.t < 2:
            raise InvalidSpec("need n >= 2 and t >= 2")
        if self.kind == "ws_bandlimited":
            if self.bandwidth is None or not 1 <= self.bandwidth <= self.n:
                raise InvalidSpec("bandwidth must satisfy 1 <= B <= n")
            if not 0 <= self.rewire_prob <= 1:
                raise InvalidSpec("rewire_prob must lie in [0, 1]")
            if not 2 <= self.ws_neighbors < self.n:
                raise InvalidSpec("ws_neighbors must lie in [2, n)")
        else:
            if self.k_true is None or not 1 <= self.k_true <= self.n:
                raise InvalidSpec("k_true must satisfy 1 <= k_true <= n")
            lo, hi = self.mean_gap_range
            if not 0 <= lo <= hi:
                raise InvalidSpec("mean_gap_range must be an ordered non-negative interval")
            if self.noise_sigma < 0:
                raise InvalidSpec("noise_sigma must be non-negative")


def generate_ws_bandlimited(spec: SyntheticSpec) -> tuple[TimeSeriesDataset, SimilarityGraph]:
    """Watts-Strogatz graph plus signals living in its first ``B`` Laplacian eigenvectors."""
    spec.validate()
    if spec.kind != "ws_bandlimited":
        raise InvalidSpec("spec.kind must be 'ws_bandlimited'")
    rng = np.random.default_rng(spec.seed)
    g = nx.connected_watts_strogatz_graph(
        spec.n, spec.ws_neighbors, spec.rewire_prob, tries=1000,
        seed=int(rng.integers(2**31 - 1)))
    graph = SimilarityGraph.from_edges(spec.n, g.edges(), method="ws", threshold=float("nan"))
    decomp = decompose(graph, spec.bandwidth)
    coeffs = rng.standard_normal((spec.bandwidth, spec.t))
    values = decomp.vb @ coeffs

    leak = np.abs(gft(decomp, values)[spec.bandwidth:])
    if leak.size and leak.max() >= 1e-10:
        raise InvalidSpec(f"generated signals leak {leak.max():.3g} outside the band")
    ds = TimeSeriesDataset.from_array(
        values, meta={"generator": "ws_bandlimited", "bandwidth": spec.bandwidth,
                      "seed": spec.seed, "rewire_prob": spec.rewire_prob})
    return ds, graph


def generate_stratified(spec: SyntheticSpec) -> tuple[TimeSeriesDataset, SamplingPartition]:
    """Sensors in ``k_true`` groups; each group shares a mean profile and the
    group base levels are separated by gaps drawn from ``mean_gap_range``.

    Per-sensor noise is Gaussian with ``noise_sigma`` and is centred over time,
    so every sensor's temporal mean equals its group's mean exactly.
    """
    spec.validate()
    if spec.kind != "stratified":
        raise InvalidSpec("spec.kind must be 'stratified'")
    rng = np.random.default_rng(spec.seed)
    n, t, k = spec.n, spec.t, spec.k_true

    order = rng.permutation(n)
    labels = np.empty(n, dtype=int)
    labels[order[:k]] = np.arange(k)
    labels[order[k:]] = rng.integers(0, k, size=n - k)

    lo, hi = spec.mean_gap_range
    gaps = rng.uniform(lo, hi, size=k - 1)
    base = spec.base_level + np.concatenate([[0.0], np.cumsum(gaps)])
    # shared zero-mean temporal shape, so group means differ only by their base level
    shape = np.sin(2 * np.pi * np.arange(t) / max(t, 2)) + 0.3 * rng.standard_normal(t)
    shape -= shape.mean()

    noise = rng.normal(0.0, spec.noise_sigma, size=(n, t))
    noise -= noise.mean(axis=1, keepdims=True)
    values = base[labels][:, None] + shape[None, :] + noise

    subsets = [sorted(np.flatnonzero(labels == p).tolist()) for p in range(k)]
    part = SamplingPartition(subsets, algorithm="constructed", mode="fixed_k",
                             meta={"group_base": base.tolist()})
    ds = TimeSeriesDataset.from_array(
        values, meta={"generator": "stratified", "seed": spec.seed, "k_true": k,
                      "noise_sigma": spec.noise_sigma, "noise_model": "gaussian, centred per sensor",
                      "noise_model_is_assumed": True})
    return ds, part
