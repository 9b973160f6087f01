"""Metadata-driven choice of graph method and sampler, and the pipeline that runs it."""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ConfigError, RepSampleError
from .metrics import EvaluationReport, evaluate
from .partition import run_sampler
from .similarity import GraphBuildConfig, build_graph
from .spectral import DEFAULT_ETA, decompose, default_bandwidth

# graph method names used by the recommendation; "nei" is the k-NN graph
PHASE1_METHOD = {"haar": "haar", "nei": "knn"}


@dataclass(frozen=True)
class AutoSelectConfig:
    th_n: int = 90
    th_e: float = 0.40

    def validate(self) -> None:
        if self.th_n < 2:
            raise ConfigError("th_n must be >= 2")
        if not 0 < self.th_e < 1:
            raise ConfigError("th_e must lie in (0, 1)")


@dataclass(frozen=True)
class Recommendation:
    phase1: str
    phase2: tuple[str, ...]

    @property
    def method(self) -> str:
        return PHASE1_METHOD[self.phase1]


def recommend(n: int, desired_density: float, config: AutoSelectConfig | None = None
              ) -> Recommendation:
    config = config or AutoSelectConfig()
    config.validate()
    if not 0 < desired_density < 1:
        raise ConfigError("desired density must lie in (0, 1)")
    sparse = desired_density < config.th_e
    if n < config.th_n:
        return Recommendation("haar", ("smmr", "frob") if sparse else ("srel", "frob"))
    if sparse:
        return Recommendation("nei", ("smmr", "frob"))
    return Recommendation("haar", ("srel", "frob"))


@dataclass
class AutoResult:
    graph: object
    partition: object
    report: EvaluationReport
    provenance: dict = field(default_factory=dict)

    def __iter__(self):
        return iter((self.graph, self.partition, self.report))


def run_auto(dataset, desired_density: float, k: int | None = None, epsilon: float | None = None,
             config: AutoSelectConfig | None = None, bandwidth: int | None = None,
             eta=DEFAULT_ETA, seed: int = 0, graph_dataset=None, graph=None) -> AutoResult:
    """Recommend, build the graph, run the first sampler that succeeds, evaluate.

    ``graph_dataset`` (default ``dataset``) is what the graph is learned from,
    e.g. a prefix of the series; evaluation always uses ``dataset``. A known
    ``graph`` skips graph construction and only the sampler choice applies.
    """
    if (k is None) == (epsilon is None):
        raise ConfigError("give exactly one of K / epsilon")
    rec = recommend(dataset.n, desired_density, config)
    if graph is None:
        graph = build_graph(graph_dataset or dataset,
                            GraphBuildConfig(rec.method, target_edge_density=desired_density))
        phase1 = rec.method
    else:
        phase1 = "given"
    b = bandwidth or default_bandwidth(dataset.n, k)
    decomp = decompose(graph, b)
    attempts, errors = [], []
    for name in rec.phase2:
        try:
            part = run_sampler(name, graph, decomp, k=k, epsilon=epsilon, dataset=dataset,
                               eta=eta, seed=seed)
        except RepSampleError as exc:
            attempts.append({"sampler": name, "error": f"{type(exc).__name__}: {exc}"})
            errors.append(exc)
            continue
        attempts.append({"sampler": name, "error": None})
        report = evaluate(dataset, graph, decomp, part)
        prov = {"phase1": rec.phase1, "method": phase1, "phase2": list(rec.phase2),
                "executed": name, "attempts": attempts, "bandwidth": b,
                "threshold": graph.threshold, "achieved_edge_density": graph.achieved_edge_density}
        return AutoResult(graph, part, report, prov)
    # a sampler that cannot run in this mode says less than one that tried and failed
    real = [e for e in errors if not isinstance(e, ConfigError)]
    raise (real or errors)[0]
