"""Static analysis of graph-algorithm pseudo-code (``.gpc`` files)."""
from __future__ import annotations

from ..features import DataFeatureVector
from .counting import (COLLAPSE, ITERATOR_SYMBOL, AlgorithmFeatureVector, GpcAnalysisError, OpCountIR,
                       UnboundSymbolError, add_ir, count_ops, evaluate, evaluate_ir, scale_ir,
                       symbol_bindings)
from .interp import Interpreter, run_counts
from .poly import SYMBOLS, Poly
from .syntax import GpcError, GpcSyntaxError, Program, UnknownSymbolError, format_program, parse

__all__ = [
    "AlgorithmFeatureVector", "COLLAPSE", "GpcAnalysisError", "GpcError", "GpcSyntaxError",
    "ITERATOR_SYMBOL", "Interpreter", "OpCountIR", "Poly", "Program", "SYMBOLS", "UnboundSymbolError",
    "UnknownSymbolError", "add_ir", "analyze", "count_ops", "evaluate", "evaluate_ir", "format_listing",
    "format_program", "parse", "run_counts", "scale_ir", "symbol_bindings",
]


def analyze(source: str, df: DataFeatureVector, moments: bool = False) -> AlgorithmFeatureVector:
    """Parse, count and evaluate in one step."""
    return evaluate(count_ops(parse(source)), df, moments)


def format_listing(ir: OpCountIR, values: dict[str, float] | None = None) -> str:
    """Key-value text form: the symbolic IR, then evaluated counts."""
    lines = ["IR = {"]
    lines += [f"    '{k}': {v}," for k, v in ir.items()]
    lines.append("}")
    if values is not None:
        lines.append("Eval = {")
        lines += [f"    '{k}': {v!r}," for k, v in values.items()]
        lines.append("}")
    return "\n".join(lines)
