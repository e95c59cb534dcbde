"""Polynomials with non-negative coefficients over the five graph symbols."""
from __future__ import annotations

from typing import Callable, Mapping

SYMBOLS = (
    "AllOfPartSetV",
    "AllOfPartSetE",
    "InVertexSetToPartOfAllV",
    "OutVertexSetFromPartOfAllV",
    "BothVertexSetOfPartOfAllV",
)
_INDEX = {s: k for k, s in enumerate(SYMBOLS)}
_ZERO_EXP = (0,) * len(SYMBOLS)


class Poly:
    """Sparse map from exponent tuples (in :data:`SYMBOLS` order) to coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[tuple, float] | None = None):
        self.terms = {e: float(c) for e, c in (terms or {}).items() if c != 0}

    @classmethod
    def const(cls, c: float) -> "Poly":
        return cls({_ZERO_EXP: c})

    @classmethod
    def symbol(cls, name: str) -> "Poly":
        exp = [0] * len(SYMBOLS)
        exp[_INDEX[name]] = 1
        return cls({tuple(exp): 1.0})

    def __add__(self, other):
        other = _coerce(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0.0) + c
        return Poly(out)

    __radd__ = __add__

    def __mul__(self, other):
        other = _coerce(other)
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0.0) + c1 * c2
        return Poly(out)

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, (int, float)):
            other = Poly.const(other)
        return isinstance(other, Poly) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    def is_constant(self) -> bool:
        return all(e == _ZERO_EXP for e in self.terms)

    def evaluate(self, bindings: Mapping[str, float] | None = None,
                 monomial: Callable[[tuple], float] | None = None) -> float:
        """Numeric value. ``monomial`` overrides how a product of symbols is valued."""
        total = 0.0
        for e, c in sorted(self.terms.items()):
            if monomial is not None:
                m = monomial(e)
            else:
                m = 1.0
                for k, p in enumerate(e):
                    if p:
                        if bindings is None or SYMBOLS[k] not in bindings:
                            raise KeyError(SYMBOLS[k])
                        m *= float(bindings[SYMBOLS[k]]) ** p
            total += c * m
        return total

    def __repr__(self):
        return f"Poly({str(self)!r})"

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        # highest total degree first, constant last
        for e, c in sorted(self.terms.items(), key=lambda kv: (-sum(kv[0]), kv[0])):
            syms = []
            # degree symbols before the cardinality ones, as in the analyzer's listing output
            for k in (2, 3, 4, 0, 1):
                syms.extend([SYMBOLS[k]] * e[k])
            parts.append("*".join(syms + [repr(c)]) if syms else repr(c))
        return " + ".join(parts)

    def to_dict(self) -> dict:
        return {"*".join(f"{SYMBOLS[k]}^{p}" for k, p in enumerate(e) if p) or "1": c
                for e, c in sorted(self.terms.items())}


def _coerce(x) -> Poly:
    if isinstance(x, Poly):
        return x
    if isinstance(x, (int, float)):
        return Poly.const(x)
    return NotImplemented
