"""Symbolic operation counting and evaluation into algorithm features.

Each operation's count is the product of the multiplicities of its
enclosing loops times how often it occurs per visit. Loop multiplicities:
``for(k)`` gives ``k`` (identifiers are folded when declared with an integer
literal and never reassigned), iterators give one of the graph symbols.
An ``if`` body is counted once per reach of the ``if`` (an upper bound on
the taken count).

Counting rules per visit:

* iterator loop header: one ``<iterator>`` op (e.g. ``get_in_vertex_to``)
* ``x.value`` read/write: ``vertex_value_*`` or ``edge_value_*`` by binding
* bare vertex/edge name read (identity comparison): ``vertex_value_read`` /
  ``edge_value_read``; ``e.src``/``e.dst``: ``edge_value_read``
* scalar read/write (declarations with an initialiser write once):
  ``others_value_*``
* ``v.NUM_IN_DEGREE`` etc: ``in_edge_num`` / ``out_edge_num`` /
  ``both_edge_num``; ``NUM_VERTEX``/``NUM_EDGE``: ``num_vertex``/``num_edge``
* ``+ - * /`` and unary minus (as ``subtract``); comparisons: ``compare``
* ``Global.apply``: ``apply``
"""
from __future__ import annotations

from typing import Mapping

from ..features import ALGO_FEATURES, DataFeatureVector
from .poly import SYMBOLS, Poly
from .syntax import (Apply, Assign, BinOp, Const, Decl, ForCount, ForEach, GpcError, If, Name,
                     Neg, Num, Program, Prop)

ITERATOR_SYMBOL = {
    "ALL_VERTEX_LIST": "AllOfPartSetV",
    "ALL_EDGE_LIST": "AllOfPartSetE",
    "GET_IN_VERTEX_TO": "InVertexSetToPartOfAllV",
    "GET_OUT_VERTEX_FROM": "OutVertexSetFromPartOfAllV",
    "GET_BOTH_VERTEX_OF": "BothVertexSetOfPartOfAllV",
}
DEGREE_KEY = {"NUM_IN_DEGREE": "in_edge_num", "NUM_OUT_DEGREE": "out_edge_num",
              "NUM_BOTH_DEGREE": "both_edge_num"}
# analyzer-internal keys folded onto the feature inventory (None = dropped)
COLLAPSE = {"in_edge_num": "num_in_degree", "out_edge_num": "num_out_degree",
            "both_edge_num": "num_both_degree", "compare": None}
_BINOP_KEY = {"+": "add", "-": "subtract", "*": "multiply", "/": "divide"}

OpCountIR = dict  # str -> Poly


class GpcAnalysisError(GpcError):
    pass


class UnboundSymbolError(GpcError, KeyError):
    pass


def _literal_constants(prog: Program) -> dict[str, int]:
    """Scalars declared with an integer literal and never assigned again."""
    decls: dict[str, int | None] = {}
    assigned: set[str] = set()
    for s in prog.walk():
        if isinstance(s, Decl):
            ok = isinstance(s.init, Num) and s.init.is_int
            decls[s.name] = s.init.value if ok and s.name not in decls else None
        elif isinstance(s, Assign) and isinstance(s.target, Name):
            assigned.add(s.target.id)
    return {k: v for k, v in decls.items() if v is not None and k not in assigned}


class _Counter:
    def __init__(self, prog: Program):
        self.ir: dict[str, Poly] = {}
        self.consts = _literal_constants(prog)

    def add(self, key: str, mult: Poly, times: float = 1.0) -> None:
        self.ir[key] = self.ir.get(key, Poly()) + mult * times

    def stmts(self, body, mult: Poly) -> None:
        for s in body:
            self.stmt(s, mult)

    def stmt(self, s, mult: Poly) -> None:
        if isinstance(s, Decl):
            if s.init is not None:
                self.expr(s.init, mult)
                self.add("others_value_write", mult)
        elif isinstance(s, Assign):
            self.expr(s.value, mult)
            self.write(s.target, mult)
        elif isinstance(s, ForEach):
            self.add(s.iterator.lower(), mult)
            self.stmts(s.body, mult * Poly.symbol(ITERATOR_SYMBOL[s.iterator]))
        elif isinstance(s, ForCount):
            k = s.count
            if isinstance(k, str):
                if k not in self.consts:
                    raise GpcAnalysisError(
                        f"loop bound {k!r} is not a compile-time integer constant", s.line, s.col)
                k = self.consts[k]
            self.stmts(s.body, mult * k)
        elif isinstance(s, If):
            self.expr(s.cond, mult)
            self.stmts(s.body, mult)
        elif isinstance(s, Apply):
            self.add("apply", mult)
        else:
            raise TypeError(s)

    def write(self, target, mult: Poly) -> None:
        if isinstance(target, Name):
            self.add("others_value_write", mult)
        else:
            self.prop_base(target.base, mult)
            self.add(f"{target.base_kind}_value_write", mult)

    def prop_base(self, base, mult: Poly) -> None:
        # reaching a vertex through e.src / e.dst reads the edge
        if isinstance(base, Prop):
            self.prop_base(base.base, mult)
            self.add("edge_value_read", mult)

    def expr(self, e, mult: Poly) -> None:
        if isinstance(e, Num):
            return
        if isinstance(e, Name):
            key = "others_value_read" if e.kind == "scalar" else f"{e.kind}_value_read"
            self.add(key, mult)
        elif isinstance(e, Const):
            self.add(e.name.lower(), mult)
        elif isinstance(e, Prop):
            self.prop_base(e.base, mult)
            if e.attr in DEGREE_KEY:
                self.add(DEGREE_KEY[e.attr], mult)
            elif e.attr == "value":
                self.add(f"{e.base_kind}_value_read", mult)
            else:  # src / dst
                self.add("edge_value_read", mult)
        elif isinstance(e, Neg):
            self.expr(e.operand, mult)
            self.add("subtract", mult)
        elif isinstance(e, BinOp):
            self.expr(e.left, mult)
            self.expr(e.right, mult)
            self.add(_BINOP_KEY.get(e.op, "compare"), mult)
        else:
            raise TypeError(e)


def count_ops(prog: Program) -> OpCountIR:
    """Symbolic operation counts keyed by lower-case feature name."""
    c = _Counter(prog)
    c.stmts(prog.body, Poly.const(1.0))
    return {k: v for k, v in sorted(c.ir.items()) if v}


def scale_ir(ir: OpCountIR, a: float) -> OpCountIR:
    if a < 0:
        raise ValueError("scale must be non-negative")
    return {k: v * a for k, v in ir.items()}


def add_ir(a: OpCountIR, b: OpCountIR) -> OpCountIR:
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, Poly()) + v
    return dict(sorted(out.items()))


def symbol_bindings(df: DataFeatureVector) -> dict[str, float]:
    """Mean-degree symbol values. Undirected graphs count each stored edge in both directions."""
    n = df.num_vertex
    e = df.num_edge if df.directed else 2 * df.num_edge
    return {
        "AllOfPartSetV": float(n),
        "AllOfPartSetE": float(e),
        "InVertexSetToPartOfAllV": float(df.in_mean),
        "OutVertexSetFromPartOfAllV": float(df.out_mean),
        "BothVertexSetOfPartOfAllV": 2.0 * df.num_edge / n,
    }


def _moment_monomial(df: DataFeatureVector, b: Mapping[str, float]):
    """Value powers of one degree symbol by E[d^k] instead of mean^k.

    This is what a loop nest gives when inner neighbour loops iterate the
    same vertex's neighbours. Only k <= 4 is recoverable from the stored
    moments; higher powers and the directed both-degree fall back to the mean.
    """
    side_of = {2: "in", 3: "out", 4: "in" if not df.directed else None}

    def value(e):
        m = 1.0
        for k, p in enumerate(e):
            if not p:
                continue
            side = side_of.get(k)
            if side is not None and 2 <= p <= 4:
                m *= df.raw_moment(side, p)
            else:
                m *= b[SYMBOLS[k]] ** p
        return m

    return value


class AlgorithmFeatureVector:
    """One non-negative value per Table-4 style feature, in :data:`ALGO_FEATURES` order."""

    __slots__ = ("_values",)

    def __init__(self, values):
        vals = tuple(float(x) for x in values)
        if len(vals) != len(ALGO_FEATURES):
            raise ValueError(f"expected {len(ALGO_FEATURES)} values, got {len(vals)}")
        self._values = vals

    @classmethod
    def from_mapping(cls, m: Mapping[str, float]) -> "AlgorithmFeatureVector":
        unknown = set(m) - set(ALGO_FEATURES)
        if unknown:
            raise KeyError(f"unknown feature(s): {sorted(unknown)}")
        return cls(m.get(k, 0.0) for k in ALGO_FEATURES)

    @classmethod
    def zeros(cls) -> "AlgorithmFeatureVector":
        return cls([0.0] * len(ALGO_FEATURES))

    def __getitem__(self, key: str) -> float:
        return self._values[ALGO_FEATURES.index(key)]

    def as_list(self) -> list[float]:
        return list(self._values)

    def as_dict(self) -> dict[str, float]:
        return dict(zip(ALGO_FEATURES, self._values))

    def __add__(self, other: "AlgorithmFeatureVector") -> "AlgorithmFeatureVector":
        return AlgorithmFeatureVector(a + b for a, b in zip(self._values, other._values))

    def __mul__(self, a: float) -> "AlgorithmFeatureVector":
        return AlgorithmFeatureVector(a * x for x in self._values)

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, AlgorithmFeatureVector) and self._values == other._values

    def __hash__(self):
        return hash(self._values)

    def __repr__(self):
        nz = {k: v for k, v in self.as_dict().items() if v}
        return f"AlgorithmFeatureVector({nz})"


def evaluate_ir(ir: OpCountIR, df: DataFeatureVector, moments: bool = False) -> dict[str, float]:
    """Evaluate every IR entry without collapsing keys."""
    b = symbol_bindings(df)
    mono = _moment_monomial(df, b) if moments else None
    out = {}
    for k, p in ir.items():
        try:
            out[k] = p.evaluate(b, mono)
        except KeyError as exc:
            raise UnboundSymbolError(f"unbound symbol {exc.args[0]!r} in {k!r}") from None
    return out


def evaluate(ir: OpCountIR, df: DataFeatureVector, moments: bool = False) -> AlgorithmFeatureVector:
    """Algorithm feature vector from symbolic counts and data features.

    ``moments=True`` values powers of a degree symbol by raw degree moments
    rather than powers of the mean.
    """
    raw = evaluate_ir(ir, df, moments)
    acc = dict.fromkeys(ALGO_FEATURES, 0.0)
    for k in sorted(raw):
        target = COLLAPSE.get(k, k)
        if target is None:
            continue
        if target not in acc:
            raise KeyError(f"IR key {k!r} has no feature")
        acc[target] += raw[k]
    return AlgorithmFeatureVector(acc[k] for k in ALGO_FEATURES)
