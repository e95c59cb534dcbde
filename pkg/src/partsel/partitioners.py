"""Vertex-cut partitioning strategies and partition quality metrics.

Strategy inventory (psid -> name)::

    0 1DSrc   1 1DDst   2 Random   3 Cano   4 2D   5 Hybrid
    6 Oblivious (excluded by default)   7-10 HDRF lambda=10/20/50/100   11 Ginger

Hashing uses the SplitMix64 finaliser (constants 0x9E3779B97F4A7C15,
0xBF58476D1CE4E5B9, 0x94D049BB133111EB) applied to ``seed ^ id`` so that
placements are identical on every platform.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from . import kernels
from .graph_core import Graph

MASK64 = (1 << 64) - 1
DEFAULT_SEED = 0
HDRF_EPSILON = 1.0
DEFAULT_HYBRID_THRESHOLD = 100
PLAN_FORMAT = "partsel-plan v1"


class PartitionError(Exception):
    pass


class InvalidConfigError(PartitionError):
    pass


class ExcludedStrategyError(PartitionError):
    pass


# hashing ------------------------------------------------------------------


def mix64(x):
    """SplitMix64 finaliser. Accepts a Python int or a uint64 array."""
    if isinstance(x, np.ndarray):
        z = x.astype(np.uint64) + np.uint64(0x9E3779B97F4A7C15)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))
    z = (int(x) + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def _hash_ids(ids: np.ndarray, seed: int) -> np.ndarray:
    return mix64(ids.astype(np.uint64) ^ np.uint64(seed & MASK64))


def cantor_pair(a, b):
    """Cantor pairing ``(a + b)(a + b + 1)/2 + b`` (wraps at 64 bits for arrays)."""
    if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
        a = np.asarray(a, dtype=np.uint64)
        b = np.asarray(b, dtype=np.uint64)
        s = a + b
        one = np.uint64(1)
        even = (s & one) == 0
        # halve the even factor first so the product wraps like the exact value mod 2**64
        tri = np.where(even, (s >> one) * (s + one), s * ((s + one) >> one))
        return tri + b
    s = int(a) + int(b)
    return (s * (s + 1) // 2 + int(b)) & MASK64


def hash_edge_1d(v: int, num_workers: int, seed: int = DEFAULT_SEED) -> int:
    return int(mix64(int(v) ^ (seed & MASK64)) % num_workers)


def hash_edge_2d_random(u: int, v: int, num_workers: int, canonical: bool, seed: int = DEFAULT_SEED) -> int:
    if canonical and u > v:
        u, v = v, u
    return int(mix64(cantor_pair(u, v) ^ (seed & MASK64)) % num_workers)


def grid_side(num_workers: int) -> int:
    s = math.isqrt(num_workers)
    if s * s != num_workers:
        raise InvalidConfigError(f"2D partitioning needs a square number of workers, got {num_workers}")
    return s


def hash_edge_grid2d(u: int, v: int, num_workers: int, seed: int = DEFAULT_SEED) -> int:
    s = grid_side(num_workers)
    hu = mix64(int(u) ^ (seed & MASK64))
    hv = mix64(int(v) ^ (seed & MASK64))
    return int((hu % s) * s + (hv % s))


# strategy specs -------------------------------------------------------------

STRATEGY_NAMES = {
    0: "1DSrc",
    1: "1DDst",
    2: "Random",
    3: "Cano",
    4: "2D",
    5: "Hybrid",
    6: "Oblivious",
    7: "HDRF",
    8: "HDRF",
    9: "HDRF",
    10: "HDRF",
    11: "Ginger",
}
HDRF_LAMBDAS = {7: 10.0, 8: 20.0, 9: 50.0, 10: 100.0}
NUM_PSIDS = 12


@dataclass(frozen=True)
class StrategySpec:
    psid: int
    name: str
    lam: float | None = None
    degree_threshold: int = DEFAULT_HYBRID_THRESHOLD
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if self.psid not in STRATEGY_NAMES:
            raise InvalidConfigError(f"unknown psid {self.psid}")
        if STRATEGY_NAMES[self.psid] != self.name:
            raise InvalidConfigError(f"psid {self.psid} is {STRATEGY_NAMES[self.psid]}, not {self.name}")
        if self.psid in HDRF_LAMBDAS and self.lam != HDRF_LAMBDAS[self.psid]:
            raise InvalidConfigError(f"psid {self.psid} requires lambda={HDRF_LAMBDAS[self.psid]}")

    @property
    def label(self) -> str:
        if self.name == "HDRF":
            return f"HDRF-{int(self.lam)}"
        return self.name

    @classmethod
    def from_psid(cls, psid: int, seed: int = DEFAULT_SEED, degree_threshold: int = DEFAULT_HYBRID_THRESHOLD):
        if psid not in STRATEGY_NAMES:
            raise InvalidConfigError(f"unknown psid {psid}")
        return cls(psid, STRATEGY_NAMES[psid], HDRF_LAMBDAS.get(psid), degree_threshold, seed)

    @classmethod
    def parse(cls, token: str | int, **kw) -> "StrategySpec":
        """Accept a psid, a name (``2D``) or an HDRF label (``HDRF-20``)."""
        s = str(token).strip()
        if s.isdigit():
            return cls.from_psid(int(s), **kw)
        low = s.lower()
        for psid, name in STRATEGY_NAMES.items():
            spec = cls.from_psid(psid, **kw)
            if low in (spec.label.lower(), name.lower()) and (name != "HDRF" or low == spec.label.lower()):
                return spec
        raise InvalidConfigError(f"unknown strategy {token!r}")


def default_strategies(include_oblivious: bool = False, seed: int = DEFAULT_SEED,
                       degree_threshold: int = DEFAULT_HYBRID_THRESHOLD) -> list[StrategySpec]:
    psids = [p for p in range(NUM_PSIDS) if include_oblivious or p != 6]
    return [StrategySpec.from_psid(p, seed=seed, degree_threshold=degree_threshold) for p in psids]


# plans --------------------------------------------------------------------


@dataclass(eq=False)
class PartitionPlan:
    """Edge placement plus master/mirror placement.

    ``edge_assignment[i]`` is the worker of forward-sorted edge ``i``;
    ``presence[k, w]`` says whether worker ``w`` holds dense vertex ``k``;
    ``master[k]`` is the master worker of dense vertex ``k``.
    """

    graph: Graph
    num_workers: int
    edge_assignment: np.ndarray
    master: np.ndarray
    presence: np.ndarray
    psid: int = -1
    _holders: list | None = field(default=None, repr=False)

    @classmethod
    def from_assignment(cls, g: Graph, assignment, num_workers: int, psid: int = -1,
                        seed: int = DEFAULT_SEED, masters: dict | None = None) -> "PartitionPlan":
        a = np.asarray(assignment, dtype=np.int32)
        if a.shape != (g.num_edges,):
            raise PartitionError("assignment length must equal |E|")
        if len(a) and (a.min() < 0 or a.max() >= num_workers):
            raise PartitionError("worker id out of range")
        presence = np.zeros((g.num_vertices, num_workers), dtype=bool)
        presence[g.src_index, a] = True
        presence[g.dst_index, a] = True
        hashed = (_hash_ids(g.vertices, seed) % np.uint64(num_workers)).astype(np.int64)
        rows = np.arange(g.num_vertices)
        first = np.argmax(presence, axis=1)
        master = np.where(presence[rows, hashed], hashed, first).astype(np.int32)
        if masters:
            for v, w in masters.items():
                k = g.index_of(v)
                if not presence[k, w]:
                    raise PartitionError(f"master of {v} must be a worker holding it")
                master[k] = w
        return cls(g, num_workers, a, master, presence, psid)

    @property
    def loads(self) -> np.ndarray:
        return np.bincount(self.edge_assignment, minlength=self.num_workers)

    def holders(self, k: int) -> tuple[int, ...]:
        """Workers holding dense vertex ``k`` (ascending)."""
        if self._holders is None:
            self._holders = [tuple(np.flatnonzero(row).tolist()) for row in self.presence]
        return self._holders[k]

    def master_of(self, v: int) -> int:
        return int(self.master[self.graph.index_of(v)])

    def mirrors_of(self, v: int) -> frozenset:
        k = self.graph.index_of(v)
        return frozenset(w for w in self.holders(k) if w != self.master[k])

    @property
    def masters(self) -> dict:
        return dict(zip(self.graph.vertices.tolist(), self.master.tolist()))

    @property
    def mirrors(self) -> dict:
        return {int(v): self.mirrors_of(int(v)) for v in self.graph.vertices}

    def replica_counts(self) -> np.ndarray:
        return self.presence.sum(axis=1)

    # serialisation -------------------------------------------------------

    def dumps(self) -> str:
        buf = io.StringIO()
        buf.write(f"# {PLAN_FORMAT}\n")
        buf.write(f"workers {self.num_workers}\npsid {self.psid}\n")
        buf.write(f"edges {len(self.edge_assignment)}\n")
        for i, w in enumerate(self.edge_assignment.tolist()):
            buf.write(f"{i} {w}\n")
        buf.write(f"vertices {self.graph.num_vertices}\n")
        for k, v in enumerate(self.graph.vertices.tolist()):
            m = int(self.master[k])
            mirrors = " ".join(str(w) for w in self.holders(k) if w != m)
            buf.write(f"{v} {m}{' ' + mirrors if mirrors else ''}\n")
        return buf.getvalue()

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.dumps())

    @classmethod
    def loads_plan(cls, text: str, g: Graph) -> "PartitionPlan":
        lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
        it = iter(lines)
        W = int(next(it).split()[1])
        psid = int(next(it).split()[1])
        n_e = int(next(it).split()[1])
        assignment = np.empty(n_e, dtype=np.int32)
        for _ in range(n_e):
            i, w = next(it).split()
            assignment[int(i)] = int(w)
        next(it)
        masters = {}
        for ln in it:
            parts = ln.split()
            masters[int(parts[0])] = int(parts[1])
        return cls.from_assignment(g, assignment, W, psid=psid, masters=masters)


# strategies ---------------------------------------------------------------


def _edge_hash_1d(ids: np.ndarray, W: int, seed: int) -> np.ndarray:
    return (_hash_ids(ids, seed) % np.uint64(W)).astype(np.int32)


def _assign_random(g: Graph, W: int, seed: int, canonical: bool) -> np.ndarray:
    u, v = g.src, g.dst
    if canonical:
        u, v = np.minimum(u, v), np.maximum(u, v)
    pair = cantor_pair(u.astype(np.uint64), v.astype(np.uint64))
    return (mix64(pair ^ np.uint64(seed & MASK64)) % np.uint64(W)).astype(np.int32)


def _assign_grid(g: Graph, W: int, seed: int) -> np.ndarray:
    s = np.uint64(grid_side(W))
    hu = _hash_ids(g.src, seed) % s
    hv = _hash_ids(g.dst, seed) % s
    return (hu * s + hv).astype(np.int32)


def partition_hybrid(g: Graph, num_workers: int, degree_threshold: float = DEFAULT_HYBRID_THRESHOLD,
                     seed: int = DEFAULT_SEED) -> PartitionPlan:
    """Low in-degree vertices keep their in-edges together (hash of the
    destination); high in-degree vertices spread them by hash of the source."""
    indeg = g.in_degrees()[g.dst_index]
    by_dst = _edge_hash_1d(g.dst, num_workers, seed)
    by_src = _edge_hash_1d(g.src, num_workers, seed)
    a = np.where(indeg <= degree_threshold, by_dst, by_src)
    return PartitionPlan.from_assignment(g, a, num_workers, psid=5, seed=seed)


def partition_greedy(g: Graph, num_workers: int, kind: str, lam: float | None = None,
                     seed: int = DEFAULT_SEED, degree_threshold: float = DEFAULT_HYBRID_THRESHOLD,
                     psid: int | None = None) -> PartitionPlan:
    """Streaming greedy placements: ``oblivious``, ``hdrf`` or ``ginger``."""
    W = int(num_workers)
    if kind == "hdrf":
        if lam is None:
            raise InvalidConfigError("hdrf needs lambda")
        a = kernels.hdrf_assign(g.src_index.astype(np.int64), g.dst_index.astype(np.int64),
                                g.num_vertices, W, float(lam), HDRF_EPSILON)
        default_psid = {v: k for k, v in HDRF_LAMBDAS.items()}.get(float(lam), -1)
    elif kind == "oblivious":
        a = kernels.oblivious_assign(g.src_index.astype(np.int64), g.dst_index.astype(np.int64),
                                     g.num_vertices, W)
        default_psid = 6
    elif kind == "ginger":
        inv_src_idx = g.indices(g.inv_src).astype(np.int64)
        hash_worker = _edge_hash_1d(g.inv_src, W, seed).astype(np.int64)
        ratio = g.num_vertices / g.num_edges
        a = kernels.ginger_assign(g.in_offsets.astype(np.int64), inv_src_idx, g.fwd_perm.astype(np.int64),
                                  hash_worker, W, float(degree_threshold), ratio)
        default_psid = 11
    else:
        raise InvalidConfigError(f"unknown greedy kind {kind!r}")
    return PartitionPlan.from_assignment(g, a, W, psid=default_psid if psid is None else psid, seed=seed)


def partition(g: Graph, spec: StrategySpec, num_workers: int, include_oblivious: bool = False) -> PartitionPlan:
    if num_workers < 1:
        raise InvalidConfigError("num_workers must be >= 1")
    W = int(num_workers)
    seed = spec.seed
    name = spec.name
    if name == "Oblivious" and not include_oblivious:
        raise ExcludedStrategyError("Oblivious is excluded from the inventory; pass include_oblivious=True")
    if name == "1DSrc":
        a = _edge_hash_1d(g.src, W, seed)
    elif name == "1DDst":
        a = _edge_hash_1d(g.dst, W, seed)
    elif name == "Random":
        a = _assign_random(g, W, seed, canonical=False)
    elif name == "Cano":
        a = _assign_random(g, W, seed, canonical=True)
    elif name == "2D":
        a = _assign_grid(g, W, seed)
    elif name == "Hybrid":
        return partition_hybrid(g, W, spec.degree_threshold, seed)
    elif name == "Oblivious":
        return partition_greedy(g, W, "oblivious", seed=seed, psid=spec.psid)
    elif name == "HDRF":
        return partition_greedy(g, W, "hdrf", lam=spec.lam, seed=seed, psid=spec.psid)
    elif name == "Ginger":
        return partition_greedy(g, W, "ginger", seed=seed, degree_threshold=spec.degree_threshold, psid=spec.psid)
    else:  # pragma: no cover - StrategySpec validates names
        raise InvalidConfigError(name)
    return PartitionPlan.from_assignment(g, a, W, psid=spec.psid, seed=seed)


# metrics ------------------------------------------------------------------


def replication_factor(plan: PartitionPlan) -> float:
    """Total vertex copies over distinct vertices."""
    if plan.graph.num_vertices == 0 or len(plan.edge_assignment) == 0:
        raise PartitionError("empty plan")
    return float(plan.presence.sum()) / plan.graph.num_vertices


def load_balance(plan: PartitionPlan) -> float:
    """Max worker edge count over the mean."""
    loads = plan.loads
    if loads.sum() == 0:
        raise PartitionError("empty plan")
    return float(loads.max() / loads.mean())


def plan_summary(plan: PartitionPlan) -> dict:
    reps = plan.replica_counts()
    return {
        "psid": plan.psid,
        "num_workers": plan.num_workers,
        "replication_factor": replication_factor(plan),
        "load_balance": load_balance(plan),
        "max_replicas": int(reps.max()),
    }


def parse_strategies(tokens: Iterable[str | int], **kw) -> list[StrategySpec]:
    return [StrategySpec.parse(t, **kw) for t in tokens]
