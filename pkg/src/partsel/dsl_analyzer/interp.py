"""Direct execution of ``.gpc`` programs on a graph, counting operations.

Used to check the static counts: it applies the same per-visit counting
rules as :mod:`.counting` but only to statements that actually run. Loops
over neighbours visit one entry per incident stored edge (parallel edges
repeat; undirected self-loops appear twice), which is what the mean-degree
symbol bindings describe. Division by zero yields 0.
"""
from __future__ import annotations

from collections import Counter

import numpy as np

from ..graph_core import Graph
from .counting import DEGREE_KEY, _literal_constants
from .syntax import (Apply, Assign, BinOp, Const, Decl, ForCount, ForEach, If, Name, Neg, Num,
                     Program, Prop)


class _Ref:
    __slots__ = ("k",)

    def __init__(self, k):
        self.k = k

    def __eq__(self, other):
        return type(other) is type(self) and other.k == self.k

    def __lt__(self, other):
        return self.k < other.k

    def __le__(self, other):
        return self.k <= other.k

    def __gt__(self, other):
        return self.k > other.k

    def __ge__(self, other):
        return self.k >= other.k

    __hash__ = None


class VertexRef(_Ref):
    """Dense vertex index; comparisons follow vertex id order."""


class EdgeRef(_Ref):
    __slots__ = ("src", "dst")

    def __init__(self, k, src, dst):
        super().__init__(k)
        self.src = src
        self.dst = dst


_CMP = {
    "==": lambda a, b: a == b, "!=": lambda a, b: not a == b,
    "<": lambda a, b: a < b, "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b, ">=": lambda a, b: a >= b,
}


class Interpreter:
    def __init__(self, g: Graph, max_ops: int = 50_000_000):
        self.g = g
        n = g.num_vertices
        si, di = g.src_index.tolist(), g.dst_index.tolist()
        fwd = g.fwd_perm.tolist()
        out_nb = [[] for _ in range(n)]
        in_nb = [[] for _ in range(n)]
        for s, d in zip(si, di):
            out_nb[s].append(d)
        for k in fwd:  # inverted order: by dst then src
            in_nb[di[k]].append(si[k])
        if g.directed:
            self.nbrs = {
                "GET_OUT_VERTEX_FROM": out_nb,
                "GET_IN_VERTEX_TO": in_nb,
                "GET_BOTH_VERTEX_OF": [a + b for a, b in zip(out_nb, in_nb)],
            }
            self.edges = [(k, s, d) for k, (s, d) in enumerate(zip(si, di))]
        else:
            both = [a + b for a, b in zip(out_nb, in_nb)]
            self.nbrs = dict.fromkeys(("GET_OUT_VERTEX_FROM", "GET_IN_VERTEX_TO", "GET_BOTH_VERTEX_OF"), both)
            self.edges = [(k, s, d) for k, (s, d) in enumerate(zip(si, di))]
            self.edges += [(k, d, s) for k, (s, d) in enumerate(zip(si, di))]
        self.degree = {
            "NUM_IN_DEGREE": g.degree_array("in").tolist(),
            "NUM_OUT_DEGREE": g.degree_array("out").tolist(),
            "NUM_BOTH_DEGREE": g.degree_array("both").tolist(),
        }
        self.vvalue = [0.0] * n
        self.evalue = [0.0] * g.num_edges
        self.counts: Counter = Counter()
        self.max_ops = max_ops
        self._ops = 0

    def tick(self, key: str) -> None:
        self.counts[key] += 1
        self._ops += 1
        if self._ops > self.max_ops:
            raise RuntimeError("operation budget exceeded")

    def run(self, prog: Program) -> Counter:
        self.consts = _literal_constants(prog)
        self.block(prog.body, [{}])
        return self.counts

    # statements
    def block(self, body, scopes):
        scopes.append({})
        for s in body:
            self.stmt(s, scopes)
        scopes.pop()

    def stmt(self, s, scopes):
        if isinstance(s, Decl):
            val = 0.0
            if s.init is not None:
                val = self.expr(s.init, scopes)
                self.tick("others_value_write")
            scopes[-1][s.name] = val
        elif isinstance(s, Assign):
            val = self.expr(s.value, scopes)
            self.assign(s.target, val, scopes)
        elif isinstance(s, ForEach):
            self.tick(s.iterator.lower())
            if s.iterator == "ALL_VERTEX_LIST":
                items = [VertexRef(k) for k in range(self.g.num_vertices)]
            elif s.iterator == "ALL_EDGE_LIST":
                items = [EdgeRef(*e) for e in self.edges]
            else:
                v = self.lookup(s.arg, scopes)
                items = [VertexRef(u) for u in self.nbrs[s.iterator][v.k]]
            for it in items:
                scopes.append({s.var: it})
                self.block(s.body, scopes)
                scopes.pop()
        elif isinstance(s, ForCount):
            k = s.count if isinstance(s.count, int) else self.consts[s.count]
            for _ in range(k):
                self.block(s.body, scopes)
        elif isinstance(s, If):
            if self.truthy(self.expr(s.cond, scopes)):
                self.block(s.body, scopes)
        elif isinstance(s, Apply):
            self.tick("apply")
        else:
            raise TypeError(s)

    @staticmethod
    def truthy(x) -> bool:
        return bool(x)

    def lookup(self, name, scopes):
        for sc in reversed(scopes):
            if name in sc:
                return sc[name]
        raise KeyError(name)

    def resolve(self, e, scopes):
        """Vertex or edge reference denoted by a property base."""
        if isinstance(e, Name):
            return self.lookup(e.id, scopes)
        ref = self.resolve(e.base, scopes)
        self.tick("edge_value_read")
        return VertexRef(ref.src if e.attr == "src" else ref.dst)

    def assign(self, target, val, scopes):
        if isinstance(target, Name):
            for sc in reversed(scopes):
                if target.id in sc:
                    sc[target.id] = val
                    break
            self.tick("others_value_write")
            return
        ref = self.resolve(target.base, scopes)
        if isinstance(ref, EdgeRef):
            self.evalue[ref.k] = val
            self.tick("edge_value_write")
        else:
            self.vvalue[ref.k] = val
            self.tick("vertex_value_write")

    # expressions
    def expr(self, e, scopes):
        if isinstance(e, Num):
            return e.value
        if isinstance(e, Name):
            val = self.lookup(e.id, scopes)
            self.tick("others_value_read" if e.kind == "scalar" else f"{e.kind}_value_read")
            return val
        if isinstance(e, Const):
            self.tick(e.name.lower())
            return self.g.num_vertices if e.name == "NUM_VERTEX" else self.g.num_edges
        if isinstance(e, Prop):
            ref = self.resolve(e.base, scopes)
            if e.attr in DEGREE_KEY:
                self.tick(DEGREE_KEY[e.attr])
                return self.degree[e.attr][ref.k]
            if e.attr == "value":
                if isinstance(ref, EdgeRef):
                    self.tick("edge_value_read")
                    return self.evalue[ref.k]
                self.tick("vertex_value_read")
                return self.vvalue[ref.k]
            self.tick("edge_value_read")
            return VertexRef(ref.src if e.attr == "src" else ref.dst)
        if isinstance(e, Neg):
            val = self.expr(e.operand, scopes)
            self.tick("subtract")
            return -val
        if isinstance(e, BinOp):
            a = self.expr(e.left, scopes)
            b = self.expr(e.right, scopes)
            op = e.op
            if op in _CMP:
                self.tick("compare")
                return 1.0 if _CMP[op](a, b) else 0.0
            if op == "+":
                self.tick("add")
                return a + b
            if op == "-":
                self.tick("subtract")
                return a - b
            if op == "*":
                self.tick("multiply")
                return a * b
            self.tick("divide")
            return a / b if b != 0 else 0.0
        raise TypeError(e)


def run_counts(prog: Program, g: Graph, max_ops: int = 50_000_000) -> dict[str, int]:
    """Operation counts from actually executing ``prog`` on ``g``."""
    return dict(sorted(Interpreter(g, max_ops).run(prog).items()))


def vertex_values(prog: Program, g: Graph) -> np.ndarray:
    it = Interpreter(g)
    it.run(prog)
    return np.asarray(it.vvalue)
