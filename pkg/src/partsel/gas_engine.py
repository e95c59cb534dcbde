"""Gather-Apply-Scatter execution over a vertex-cut plan with logical workers.

Time is measured in cost units by default: every gather/apply/scatter
primitive costs ``c_compute`` on the worker doing it, every value crossing
workers costs ``c_msg`` to the sender, and each superstep barrier costs
``c_sync``. A superstep takes as long as its slowest worker.

Per superstep, for each active vertex ``v``:

* every worker holding ``v`` folds ``gather`` over its local edges of ``v``
  (one primitive per edge unless the program reports more work);
  mirrors send their partial to the master (one message per mirror);
* the master folds the partials in ascending worker order, calls ``apply``
  and broadcasts the new value to its mirrors (one message per mirror);
* every worker holding ``v`` runs ``scatter`` over its local edges and the
  activations it raises are forwarded to the master of the activated vertex.

Programs see dense vertex indices (``0..|V|-1``, ascending id order).
"""
from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Iterable

import numpy as np

from .graph_core import Graph
from .partitioners import PartitionPlan

DEFAULT_MAX_SUPERSTEPS = 100_000


class NonConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class CostModel:
    c_compute: float = 1.0
    c_msg: float = 10.0
    c_sync: float = 50.0

    def __post_init__(self):
        if min(self.c_compute, self.c_msg, self.c_sync) < 0:
            raise ValueError("cost model parameters must be non-negative")


class VertexProgram:
    """Base class for vertex programs.

    ``gather_dir``/``scatter_dir`` are ``"in"``, ``"out"``, ``"both"`` or
    ``None``; on undirected graphs any direction means all incident edges.
    If ``iterations`` is set every vertex is active in each of exactly that
    many supersteps; otherwise execution runs until no vertex is active.
    ``sum`` must be associative and commutative; ``gather`` may return
    ``None`` for "no contribution". Partials are fresh objects, so ``sum`` may
    update its first argument in place.
    """

    name = "program"
    gather_dir: str | None = "in"
    scatter_dir: str | None = None
    iterations: int | None = None
    # Optional ``gather_work(v, v_value, u, u_value)`` / ``apply_work(v, new)``
    # give the number of primitive ops a call performs (default 1 each).
    gather_work = None
    apply_work = None

    def setup(self, g: Graph) -> None:
        self.graph = g

    def init(self, v: int) -> Any:
        return None

    def initial_active(self, g: Graph) -> Iterable[int]:
        return range(g.num_vertices)

    def gather(self, v: int, v_value: Any, u: int, u_value: Any, edge: int) -> Any:
        raise NotImplementedError

    def sum(self, a: Any, b: Any) -> Any:
        return a + b

    def apply(self, v: int, value: Any, acc: Any, step: int) -> Any:
        raise NotImplementedError

    def scatter(self, v: int, new: Any, old: Any, u: int, step: int) -> bool:
        return False


@dataclass
class SuperstepStats:
    step: int
    active: tuple
    gather_messages: int
    apply_messages: int
    activation_messages: int
    activated: tuple
    time: float


@dataclass
class ExecutionLog:
    graph: str
    algorithm: str
    psid: int
    num_workers: int
    execution_time: float
    message_count: int
    superstep_count: int
    max_worker_compute: float
    activation_messages: int = 0
    trace: list = field(default_factory=list, repr=False)

    def row(self) -> dict:
        return {
            "graph": self.graph,
            "algorithm": self.algorithm,
            "psid": self.psid,
            "num_workers": self.num_workers,
            "exec_time": self.execution_time,
            "message_count": self.message_count,
            "superstep_count": self.superstep_count,
        }


def _blocks(g: Graph, plan: PartitionPlan, direction: str | None):
    """Per worker: dense vertex -> (neighbour indices, edge indices) of local edges."""
    W = plan.num_workers
    out = [dict() for _ in range(W)]
    if direction is None:
        return out
    if not g.directed:
        direction = "both"
    a = plan.edge_assignment
    parts = []
    if direction in ("out", "both"):
        eidx = np.arange(g.num_edges)
        parts.append((a, g.src_index, g.dst_index, eidx))
    if direction in ("in", "both"):
        fwd = g.fwd_perm
        parts.append((a[fwd], g.dst_index[fwd], g.src_index[fwd], fwd))
    for wk, key, nbr, eidx in parts:
        # stable: keeps the sorted (key, nbr) order inside each (worker, key) block
        order = np.lexsort((key, wk))
        wk, key, nbr, eidx = wk[order], key[order], nbr[order], eidx[order]
        if len(wk) == 0:
            continue
        cut = np.flatnonzero((wk[1:] != wk[:-1]) | (key[1:] != key[:-1])) + 1
        starts = np.r_[0, cut]
        ends = np.r_[cut, len(wk)]
        nbr_l = nbr.tolist()
        eidx_l = eidx.tolist()
        for s, e, w, k in zip(starts.tolist(), ends.tolist(), wk[starts].tolist(), key[starts].tolist()):
            blk = out[w].get(k)
            if blk is None:
                out[w][k] = (nbr_l[s:e], eidx_l[s:e])
            else:
                out[w][k] = (blk[0] + nbr_l[s:e], blk[1] + eidx_l[s:e])
    return out


def _gather_worker(prog, blocks, vertices, values, c_compute):
    """Fold gather over one worker's local edges for each vertex in ``vertices``."""
    partials = {}
    cost = 0.0
    gather = prog.gather
    add = prog.sum
    work = prog.gather_work
    for k in vertices:
        blk = blocks.get(k)
        if not blk:
            continue
        nbrs, eids = blk
        vk = values[k]
        part = None
        ops = 0
        for u, e in zip(nbrs, eids):
            uv = values[u]
            p = gather(k, vk, u, uv, e)
            if p is not None:
                part = p if part is None else add(part, p)
            if work is not None:
                ops += work(k, vk, u, uv)
        cost += c_compute * (ops if work is not None else len(nbrs))
        if part is not None:
            partials[k] = part
    return partials, cost


def execute(
    g: Graph,
    plan: PartitionPlan,
    prog: VertexProgram,
    cost: CostModel | None = None,
    *,
    algorithm: str | None = None,
    active: Iterable[int] | None = None,
    max_supersteps: int = DEFAULT_MAX_SUPERSTEPS,
    trace: bool = False,
    timing: str = "cost",
) -> tuple[list, ExecutionLog]:
    """Run ``prog`` to completion; returns (values by dense index, log).

    ``active`` optionally overrides the program's initial active set (dense
    indices). ``timing="wall"`` runs each superstep's gather phase on a
    thread per worker and reports elapsed seconds instead of cost units;
    values are identical in both modes.
    """
    if plan.graph is not g and plan.graph.num_edges != g.num_edges:
        raise ValueError("plan was built for a different graph")
    if timing not in ("cost", "wall"):
        raise ValueError(f"unknown timing mode {timing!r}")
    cost = cost or CostModel()
    prog.setup(g)
    n = g.num_vertices
    W = plan.num_workers
    values = [prog.init(k) for k in range(n)]
    gblocks = _blocks(g, plan, prog.gather_dir)
    sblocks = _blocks(g, plan, prog.scatter_dir)
    holders = [plan.holders(k) for k in range(n)]
    master = plan.master.tolist()
    held = [[] for _ in range(W)]

    cur = sorted(set(prog.initial_active(g) if active is None else active))
    all_vertices = list(range(n))
    total_time = 0.0
    total_msgs = 0
    total_act = 0
    max_compute = 0.0
    steps = 0
    stats = []
    pool = ThreadPoolExecutor(max_workers=W) if timing == "wall" else None
    t0 = time.perf_counter()
    try:
        while True:
            if prog.iterations is not None:
                if steps >= prog.iterations:
                    break
                cur = all_vertices
            elif not cur:
                break
            if steps >= max_supersteps:
                raise NonConvergenceError(f"{prog.name} still active after {max_supersteps} supersteps")
            compute = [0.0] * W
            msgs = [0] * W
            for lst in held:
                lst.clear()
            for k in cur:
                for w in holders[k]:
                    held[w].append(k)

            # gather
            if pool is not None:
                futures = [pool.submit(_gather_worker, prog, gblocks[w], held[w], values, cost.c_compute)
                           for w in range(W)]
                results = [f.result() for f in futures]
            else:
                results = [_gather_worker(prog, gblocks[w], held[w], values, cost.c_compute) for w in range(W)]
            for w, (_, c) in enumerate(results):
                compute[w] += c

            # apply at masters
            gather_msgs = 0
            apply_msgs = 0
            updates = []
            for k in cur:
                acc = None
                m = master[k]
                for w in holders[k]:
                    part = results[w][0].get(k)
                    if part is not None:
                        acc = part if acc is None else prog.sum(acc, part)
                    if w != m:
                        msgs[w] += 1
                        gather_msgs += 1
                new = prog.apply(k, values[k], acc, steps)
                compute[m] += cost.c_compute * (prog.apply_work(k, new) if prog.apply_work is not None else 1)
                nm = len(holders[k]) - 1
                msgs[m] += nm
                apply_msgs += nm
                updates.append((k, values[k], new))
            for k, _, new in updates:
                values[k] = new

            # scatter
            nxt = set()
            sent = set()
            act_msgs = 0
            if prog.scatter_dir is not None:
                for k, old, new in updates:
                    for w in holders[k]:
                        blk = sblocks[w].get(k)
                        if not blk:
                            continue
                        nbrs = blk[0]
                        compute[w] += cost.c_compute * len(nbrs)
                        for u in nbrs:
                            if prog.scatter(k, new, old, u, steps):
                                nxt.add(u)
                                if master[u] != w and (w, u) not in sent:
                                    sent.add((w, u))
                                    msgs[w] += 1
                                    act_msgs += 1

            step_time = max(compute[w] + cost.c_msg * msgs[w] for w in range(W)) + cost.c_sync
            total_time += step_time
            total_msgs += gather_msgs + apply_msgs
            total_act += act_msgs
            max_compute = max(max_compute, max(compute))
            if trace:
                ids = g.vertices
                stats.append(SuperstepStats(
                    steps, tuple(ids[list(cur)].tolist()), gather_msgs, apply_msgs, act_msgs,
                    tuple(ids[sorted(nxt)].tolist()), step_time))
            steps += 1
            cur = sorted(nxt)
    finally:
        if pool is not None:
            pool.shutdown()
    if timing == "wall":
        total_time = time.perf_counter() - t0
    log = ExecutionLog(
        graph=g.name,
        algorithm=algorithm or prog.name,
        psid=plan.psid,
        num_workers=W,
        execution_time=total_time,
        message_count=total_msgs,
        superstep_count=steps,
        max_worker_compute=max_compute,
        activation_messages=total_act,
        trace=stats,
    )
    return values, log
