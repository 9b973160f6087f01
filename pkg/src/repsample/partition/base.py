from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ConfigError
from ..spectral import DEFAULT_ETA, SpectralDecomposition

FIXED_K = "fixed_k"
MAX_K = "max_k"


@dataclass
class SamplingPartition:
    """Ordered list of disjoint node subsets covering every sensor.

    ``flagged`` lists indices of subsets that absorbed leftover nodes and are
    therefore not guaranteed to meet the error bound they were built for.
    """

    subsets: list[list[int]]
    algorithm: str
    mode: str = "fixed_k"
    per_subset_mse: list[float] | None = None
    epsilon: float | None = None
    flagged: list[int] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.subsets = [[int(v) for v in s] for s in self.subsets]
        if self.mode not in ("fixed_k", "max_k"):
            raise ValueError(f"unknown mode {self.mode!r}")

    @property
    def k(self) -> int:
        return len(self.subsets)

    @property
    def n(self) -> int:
        return sum(len(s) for s in self.subsets)

    def violations(self, n: int) -> list[str]:
        """Return human-readable invariant violations against ``n`` nodes (empty if valid)."""
        out = []
        seen: dict[int, int] = {}
        for p, s in enumerate(self.subsets):
            if not s:
                out.append(f"subset {p} is empty")
            for v in s:
                if not 0 <= v < n:
                    out.append(f"node {v} in subset {p} is out of range")
                if v in seen:
                    out.append(f"node {v} appears in subsets {seen[v]} and {p}")
                seen[v] = p
        missing = sorted(set(range(n)) - set(seen))
        if missing:
            out.append(f"nodes not covered: {missing}")
        return out

    def validate(self, n: int) -> None:
        bad = self.violations(n)
        if bad:
            raise ValueError("; ".join(bad))

    def as_sets(self) -> set[frozenset[int]]:
        return {frozenset(s) for s in self.subsets}

    def labels(self, n: int) -> list[int]:
        lab = [-1] * n
        for p, s in enumerate(self.subsets):
            for v in s:
                lab[v] = p
        return lab

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "mode": self.mode,
            "K": self.k,
            "epsilon": _enc(self.epsilon),
            "subsets": self.subsets,
            "per_subset_mse": self.per_subset_mse,
            "flagged": self.flagged,
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SamplingPartition":
        return cls(
            subsets=d["subsets"], algorithm=d.get("algorithm", "given"),
            mode=d.get("mode", "fixed_k"), per_subset_mse=d.get("per_subset_mse"),
            epsilon=_dec(d.get("epsilon")), flagged=d.get("flagged", []), meta=d.get("meta", {}))


def _enc(v):
    return "inf" if v is not None and math.isinf(v) else v


def _dec(v):
    return math.inf if v == "inf" else v


@dataclass
class PartitionRequest:
    """What to build: ``K`` subsets (``fixed_k``) or as many as ``epsilon`` allows (``max_k``)."""

    mode: str = FIXED_K
    k: int | None = None
    epsilon: float | None = None
    decomp: SpectralDecomposition | None = None
    eta: float = DEFAULT_ETA
    dataset: object = None

    def validate(self, n: int) -> None:
        if self.mode == FIXED_K:
            if self.k is None or not 1 <= self.k <= n:
                raise ConfigError(f"K must lie in [1, {n}], got {self.k}")
        elif self.mode == MAX_K:
            if self.epsilon is None or not self.epsilon > 0:
                raise ConfigError("max_k mode needs epsilon > 0")
        else:
            raise ConfigError(f"unknown mode {self.mode!r}")


def save_partition_json(part: SamplingPartition, path, extra: dict | None = None) -> None:
    d = part.to_dict()
    if extra:
        d.update(extra)
    Path(path).write_text(json.dumps(d, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def load_partition_json(path) -> SamplingPartition:
    return SamplingPartition.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
