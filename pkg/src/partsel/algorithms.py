"""The eight benchmark algorithms as GAS vertex programs.

Each algorithm ships its pseudo-code in ``algos/<name>.gpc`` for the
analyzer. Conventions:

* PageRank: unnormalised ``(1 - d) + d * sum(PR(u) / outdeg(u))`` from a
  uniform ``1/|V|`` start; vertices without out-edges contribute nothing.
* Neighbour sets for APCN/TC/CC ignore edge direction and self-loops.
* Clustering coefficient: ``links / (k * (k - 1))`` where ``links`` counts
  each adjacent unordered neighbour pair once; ``k < 2`` gives 0.
* Greedy colouring visits vertices in ascending id order.
* Random walk hop choices come from a counter-based hash of
  (seed, source vertex, hop), so walks do not depend on the partitioning.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable

from .gas_engine import CostModel, ExecutionLog, VertexProgram, execute
from .graph_core import Graph, out_neighbors
from .partitioners import MASK64, PartitionPlan, mix64

ALGORITHM_NAMES = ("AID", "AOD", "PR", "GC", "APCN", "TC", "CC", "RW")
TRAINING_ALGORITHMS = ("AID", "AOD", "PR", "GC", "APCN", "TC")
HELD_OUT_ALGORITHMS = ("CC", "RW")


class DegreeProgram(VertexProgram):
    iterations = 1

    def __init__(self, mode: str = "in"):
        self.name = "AID" if mode == "in" else "AOD"
        self.gather_dir = mode

    def init(self, v):
        return 0

    def gather(self, v, v_value, u, u_value, edge):
        return 1

    def apply(self, v, value, acc, step):
        return acc or 0


class PageRankProgram(VertexProgram):
    name = "PR"
    gather_dir = "in"
    scatter_dir = "out"

    def __init__(self, iterations: int = 10, damping: float = 0.85):
        if iterations < 1:
            raise ValueError("iterations must be >= 1")
        self.iterations = iterations
        self.damping = damping

    def setup(self, g):
        super().setup(g)
        self.n = g.num_vertices
        self.outdeg = g.degree_array("out").tolist()

    def init(self, v):
        return 1.0 / self.n

    def gather(self, v, v_value, u, u_value, edge):
        return u_value / self.outdeg[u]

    def apply(self, v, value, acc, step):
        return (1.0 - self.damping) + self.damping * (acc or 0.0)

    def scatter(self, v, new, old, u, step):
        return True


_NOT_READY = (True, frozenset())
_NO_COLOR = (False, frozenset())


class GreedyColoringProgram(VertexProgram):
    """A vertex picks the smallest colour unused by its lower-id neighbours
    once all of them are coloured."""

    name = "GC"
    gather_dir = "both"
    scatter_dir = "both"

    def init(self, v):
        return -1

    def gather(self, v, v_value, u, u_value, edge):
        if u >= v:
            return None
        if u_value < 0:
            return _NOT_READY
        return (False, frozenset((u_value,)))

    def sum(self, a, b):
        return (a[0] or b[0], a[1] | b[1])

    def apply(self, v, value, acc, step):
        if value >= 0:
            return value
        blocked, used = acc if acc is not None else _NO_COLOR
        if blocked:
            return -1
        c = 0
        while c in used:
            c += 1
        return c

    def scatter(self, v, new, old, u, step):
        return new >= 0 and old < 0 and u > v


class _TwoPhase(VertexProgram):
    """Shared machinery for APCN / TC / CC.

    Superstep 0 gathers the undirected neighbour set of each vertex;
    superstep 1 gathers, keyed by neighbour, something computed from the
    neighbour's set, so parallel edges never double count.
    """

    gather_dir = "both"
    iterations = 2

    def init(self, v):
        return (frozenset(), None)

    def gather(self, v, v_value, u, u_value, edge):
        if u == v:
            return None
        if v_value[1] is None:
            return {u: None}
        return {u: self.pair(v, v_value[0], u, u_value[0])}

    def sum(self, a, b):
        a.update(b)
        return a

    def apply(self, v, value, acc, step):
        if step == 0:
            return (frozenset(acc or ()), "ready")
        return (value[0], self.finish(v, value[0], acc or {}))

    def gather_work(self, v, v_value, u, u_value):
        # the second pass scans the neighbour's set
        return 1 if v_value[1] is None else 1 + len(u_value[0])

    def pair(self, v, nbrs_v, u, nbrs_u):
        raise NotImplementedError

    def finish(self, v, nbrs, acc):
        raise NotImplementedError


class APCNProgram(_TwoPhase):
    name = "APCN"

    def pair(self, v, nbrs_v, u, nbrs_u):
        return tuple(x for x in nbrs_u if x > v)

    def apply_work(self, v, new):
        return 1 + len(new[1]) if isinstance(new[1], dict) else 1

    def finish(self, v, nbrs, acc):
        counts = Counter()
        for xs in acc.values():
            counts.update(xs)
        return dict(counts)


class TriangleCountProgram(_TwoPhase):
    name = "TC"

    def pair(self, v, nbrs_v, u, nbrs_u):
        if u < v:
            return 0
        return sum(1 for x in nbrs_u if x > u and x in nbrs_v)

    def finish(self, v, nbrs, acc):
        return sum(acc.values())


class ClusteringCoefficientProgram(_TwoPhase):
    name = "CC"

    def gather_work(self, v, v_value, u, u_value):
        # set intersection walks the smaller side
        return 1 if v_value[1] is None else 1 + min(len(v_value[0]), len(u_value[0]))

    def pair(self, v, nbrs_v, u, nbrs_u):
        return len(nbrs_v & nbrs_u)

    def finish(self, v, nbrs, acc):
        k = len(nbrs)
        if k < 2:
            return 0.0
        links = sum(acc.values()) // 2
        return links / (k * (k - 1))


def walk_choice(seed: int, source: int, hop: int, n_choices: int) -> int:
    """Index of the neighbour taken at ``hop`` by the walk started at ``source``."""
    key = mix64(mix64(mix64(seed & MASK64) ^ (source & MASK64)) ^ hop)
    return int(key % n_choices)


class RandomWalkProgram(VertexProgram):
    """Walkers move one hop per superstep along uniformly chosen out-edges.

    A vertex's value is ``(walkers, finished)``: walkers currently parked on
    it keyed by source id, and completed walks. A walker that reached the
    vertex after ``t`` hops is pulled by its chosen neighbour in superstep
    ``t``; older entries are stale and ignored.
    """

    name = "RW"
    gather_dir = "in"
    scatter_dir = "out"

    def __init__(self, steps: int = 10, seed: int = 0):
        if steps < 1:
            raise ValueError("steps must be >= 1")
        self.steps = steps
        self.seed = seed

    def setup(self, g):
        super().setup(g)
        ids = g.vertices.tolist()
        self.ids = ids
        self.index = {v: k for k, v in enumerate(ids)}
        self.nbrs = [[self.index[x] for x in out_neighbors(g, v)] for v in ids]

    def init(self, v):
        if not self.nbrs[v]:
            return ({}, {self.ids[v]: ()})
        return ({self.ids[v]: ()}, {})

    def gather(self, v, v_value, u, u_value, edge):
        walkers = u_value[0]
        if not walkers:
            return None
        choices = self.nbrs[u]
        out = None
        for src, path in walkers.items():
            hop = len(path)
            if choices[walk_choice(self.seed, src, hop, len(choices))] == v:
                if out is None:
                    out = {}
                out[src] = path + (self.ids[v],)
        return out

    def gather_work(self, v, v_value, u, u_value):
        return 1 + len(u_value[0])

    def sum(self, a, b):
        a.update(b)
        return a

    def apply(self, v, value, acc, step):
        finished = value[1]
        walkers = {}
        if acc:
            sink = not self.nbrs[v]
            for src, path in acc.items():
                if len(path) != step + 1:
                    continue
                if sink or len(path) >= self.steps:
                    finished = dict(finished)
                    finished[src] = path
                else:
                    walkers[src] = path
        return (walkers, finished)

    def scatter(self, v, new, old, u, step):
        return bool(new[0])


# registry -----------------------------------------------------------------


def pseudocode_path(name: str):
    return resources.files("partsel").joinpath("algos", f"{name.lower()}.gpc")


def pseudocode_source(name: str) -> str:
    return pseudocode_path(name).read_text(encoding="utf-8")


@dataclass(frozen=True)
class AlgorithmEntry:
    name: str
    make_program: Callable[..., VertexProgram]
    extract: Callable[[Graph, list], object]
    defaults: dict = field(default_factory=dict)

    @property
    def pseudocode(self) -> str:
        return pseudocode_source(self.name)


def _per_vertex(g, values):
    return dict(zip(g.vertices.tolist(), values))


def _apcn_result(g, values):
    ids = g.vertices.tolist()
    out = {}
    for k, (_, counts) in enumerate(values):
        for x, c in (counts or {}).items():
            out[(ids[k], ids[x])] = c
    return dict(sorted(out.items()))


def _rw_result(g, values):
    out = {}
    for _, finished in values:
        out.update(finished)
    return dict(sorted(out.items()))


ALGORITHMS: dict[str, AlgorithmEntry] = {
    "AID": AlgorithmEntry("AID", lambda: DegreeProgram("in"), _per_vertex),
    "AOD": AlgorithmEntry("AOD", lambda: DegreeProgram("out"), _per_vertex),
    "PR": AlgorithmEntry("PR", PageRankProgram, _per_vertex, {"iterations": 10, "damping": 0.85}),
    "GC": AlgorithmEntry("GC", GreedyColoringProgram, _per_vertex),
    "APCN": AlgorithmEntry("APCN", APCNProgram, _apcn_result),
    "TC": AlgorithmEntry("TC", TriangleCountProgram, lambda g, vals: sum(v[1] for v in vals)),
    "CC": AlgorithmEntry("CC", ClusteringCoefficientProgram,
                         lambda g, vals: dict(zip(g.vertices.tolist(), (v[1] for v in vals)))),
    "RW": AlgorithmEntry("RW", RandomWalkProgram, _rw_result, {"steps": 10, "seed": 0}),
}


def run_algorithm(name: str, g: Graph, plan: PartitionPlan, cost: CostModel | None = None,
                  **params) -> tuple[object, ExecutionLog]:
    entry = ALGORITHMS[name]
    kwargs = {**entry.defaults, **params}
    prog = entry.make_program(**kwargs)
    values, log = execute(g, plan, prog, cost, algorithm=name)
    return entry.extract(g, values), log


def run_degree(g, plan, mode="in", cost=None):
    return run_algorithm("AID" if mode == "in" else "AOD", g, plan, cost)[0]


def run_pagerank(g, plan, iterations=10, d=0.85, cost=None):
    return run_algorithm("PR", g, plan, cost, iterations=iterations, damping=d)[0]


def run_greedy_coloring(g, plan, cost=None):
    return run_algorithm("GC", g, plan, cost)[0]


def run_apcn(g, plan, cost=None):
    return run_algorithm("APCN", g, plan, cost)[0]


def run_triangle_count(g, plan, cost=None):
    return run_algorithm("TC", g, plan, cost)[0]


def run_clustering_coeff(g, plan, cost=None):
    return run_algorithm("CC", g, plan, cost)[0]


def run_random_walk(g, plan, steps=10, seed=0, cost=None):
    return run_algorithm("RW", g, plan, cost, steps=steps, seed=seed)[0]
