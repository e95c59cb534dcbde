"""Tokens, AST, recursive-descent parser and canonical printer for ``.gpc`` code.

See ``docs/gpc-grammar.md`` for the grammar. The parser also resolves names:
every identifier must be declared (``int``/``float``) or bound by an
enclosing ``for(list x in ...)`` loop, and property access is checked
against the binding kind (vertex, edge or scalar).
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

ITERATORS = {
    "ALL_VERTEX_LIST": "vertex",
    "ALL_EDGE_LIST": "edge",
    "GET_IN_VERTEX_TO": "vertex",
    "GET_OUT_VERTEX_FROM": "vertex",
    "GET_BOTH_VERTEX_OF": "vertex",
}
NEIGHBOR_ITERATORS = ("GET_IN_VERTEX_TO", "GET_OUT_VERTEX_FROM", "GET_BOTH_VERTEX_OF")
GRAPH_CONSTANTS = ("NUM_VERTEX", "NUM_EDGE")
DEGREE_PROPS = ("NUM_IN_DEGREE", "NUM_OUT_DEGREE", "NUM_BOTH_DEGREE")
VERTEX_PROPS = ("value",) + DEGREE_PROPS
EDGE_PROPS = ("value", "src", "dst")
TYPES = ("int", "float")
KEYWORDS = {"int", "float", "list", "for", "in", "if", "Global", "apply"} | set(ITERATORS) | set(GRAPH_CONSTANTS)

CMP_OPS = ("==", "!=", "<=", ">=", "<", ">")


class GpcError(Exception):
    """Base class for analyzer errors; carries a 1-based source position."""

    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.message = message
        self.line = line
        self.col = col
        where = f"line {line}, column {col}: " if line else ""
        super().__init__(where + message)


class GpcSyntaxError(GpcError):
    pass


class UnknownSymbolError(GpcSyntaxError):
    pass


# --- lexer -------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*)
  | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<str>"[^"\n]*")
  | (?P<ident>[A-Za-z_]\w*)
  | (?P<op>==|!=|<=|>=|[<>=+\-*/(){};,.])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # num, str, ident, op, eof
    text: str
    line: int
    col: int


def tokenize(source: str) -> list[Token]:
    toks: list[Token] = []
    pos = 0
    line = 1
    line_start = 0
    n = len(source)
    while pos < n:
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise GpcSyntaxError(f"unexpected character {source[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        text = m.group()
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            toks.append(Token(kind, text, line, pos - line_start + 1))
        pos = m.end()
    toks.append(Token("eof", "", line, pos - line_start + 1))
    return toks


# --- AST ---------------------------------------------------------------------
# Positions are kept for diagnostics but excluded from equality so that a
# re-parsed canonical printing compares equal to the original tree.


@dataclass(frozen=True)
class Num:
    value: float
    is_int: bool
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Name:
    id: str
    kind: str = field(default="scalar", compare=False)  # scalar, vertex or edge
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Const:
    """``NUM_VERTEX`` or ``NUM_EDGE``."""

    name: str
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Prop:
    base: object  # Name or Prop(src/dst)
    attr: str
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)

    @property
    def base_kind(self) -> str:
        if isinstance(self.base, Prop):
            return "vertex"  # e.src / e.dst
        return self.base.kind


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Neg:
    operand: object
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Decl:
    type: str
    name: str
    init: object = None
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Assign:
    target: object  # Name or Prop
    value: object
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class ForEach:
    var: str
    iterator: str
    arg: str | None
    body: tuple
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class ForCount:
    count: object  # int literal or identifier name
    body: tuple
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class If:
    cond: object
    body: tuple
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Apply:
    target: str
    tag: str
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Program:
    body: tuple = ()

    def walk(self):
        """All statements, depth first."""
        stack = list(reversed(self.body))
        while stack:
            s = stack.pop()
            yield s
            if isinstance(s, (ForEach, ForCount, If)):
                stack.extend(reversed(s.body))

    @property
    def loops(self) -> list:
        return [s for s in self.walk() if isinstance(s, (ForEach, ForCount))]


# --- parser ------------------------------------------------------------------


class _Parser:
    def __init__(self, source: str):
        self.toks = tokenize(source)
        self.i = 0
        self.scopes: list[dict[str, str]] = [{}]

    # token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg, tok=None, cls=GpcSyntaxError):
        tok = tok or self.tok
        return cls(msg, tok.line, tok.col)

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("op", "ident") and t.text == text

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        if not self.at(text):
            got = self.tok.text or "end of input"
            if text == "}" and self.tok.kind == "eof":
                raise self.error("unbalanced braces: missing '}'")
            raise self.error(f"expected {text!r}, got {got!r}")
        return self.advance()

    def expect_ident(self) -> Token:
        t = self.tok
        if t.kind != "ident" or t.text in KEYWORDS:
            raise self.error(f"expected identifier, got {t.text or 'end of input'!r}")
        return self.advance()

    # scopes
    def lookup(self, name: str, tok: Token) -> str:
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        raise self.error(f"unknown symbol {name!r}", tok, UnknownSymbolError)

    def declare(self, name: str, kind: str, tok: Token) -> None:
        if name in self.scopes[-1]:
            raise self.error(f"{name!r} already declared in this scope", tok)
        self.scopes[-1][name] = kind

    # statements
    def program(self) -> Program:
        body = []
        while self.tok.kind != "eof":
            if self.at("}"):
                raise self.error("unbalanced braces: unexpected '}'")
            body.append(self.statement())
        return Program(tuple(body))

    def block(self) -> tuple:
        self.expect("{")
        self.scopes.append({})
        body = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                raise self.error("unbalanced braces: missing '}'")
            body.append(self.statement())
        self.advance()
        self.scopes.pop()
        return tuple(body)

    def statement(self):
        t = self.tok
        if t.kind == "ident":
            if t.text in TYPES:
                return self.declaration()
            if t.text == "for":
                return self.for_stmt()
            if t.text == "if":
                return self.if_stmt()
            if t.text == "Global":
                return self.apply_stmt()
            if t.text == "list":
                raise self.error("'list' variables can only be bound by a for loop")
            return self.assignment()
        raise self.error(f"unexpected {t.text or 'end of input'!r}")

    def declaration(self) -> Decl:
        t = self.advance()
        name = self.expect_ident()
        init = None
        if self.at("="):
            self.advance()
            init = self.expr()
        self.expect(";")
        self.declare(name.text, "scalar", name)
        return Decl(t.text, name.text, init, t.line, t.col)

    def assignment(self) -> Assign:
        t = self.tok
        target = self.postfix()
        if isinstance(target, Name):
            if target.kind != "scalar":
                raise self.error(f"cannot assign to loop variable {target.id!r}", t)
        elif isinstance(target, Prop):
            if target.attr != "value":
                raise self.error(f"property {target.attr!r} is read-only", t)
        else:
            raise self.error("invalid assignment target", t)
        self.expect("=")
        value = self.expr()
        self.expect(";")
        return Assign(target, value, t.line, t.col)

    def for_stmt(self):
        t = self.advance()
        self.expect("(")
        if self.at("list"):
            self.advance()
            var = self.expect_ident()
            self.expect("in")
            it = self.tok
            if it.kind != "ident" or it.text not in ITERATORS:
                raise self.error(f"{it.text or 'end of input'!r} is not iterable", it)
            self.advance()
            arg = None
            if it.text in NEIGHBOR_ITERATORS:
                self.expect("(")
                a = self.expect_ident()
                if self.lookup(a.text, a) != "vertex":
                    raise self.error(f"{it.text} expects a vertex, {a.text!r} is not one", a)
                arg = a.text
                self.expect(")")
            self.expect(")")
            self.scopes.append({var.text: ITERATORS[it.text]})
            body = self.block()
            self.scopes.pop()
            return ForEach(var.text, it.text, arg, body, t.line, t.col)
        c = self.tok
        if c.kind == "num" and re.fullmatch(r"\d+", c.text):
            count = int(c.text)
        elif c.kind == "ident" and c.text not in KEYWORDS:
            if self.lookup(c.text, c) != "scalar":
                raise self.error(f"loop count {c.text!r} must be a scalar", c)
            count = c.text
        else:
            raise self.error("loop count must be a non-negative integer literal or an identifier", c)
        self.advance()
        self.expect(")")
        body = self.block()
        return ForCount(count, body, t.line, t.col)

    def if_stmt(self) -> If:
        t = self.advance()
        self.expect("(")
        cond = self.expr()
        self.expect(")")
        return If(cond, self.block(), t.line, t.col)

    def apply_stmt(self) -> Apply:
        t = self.advance()
        self.expect(".")
        self.expect("apply")
        self.expect("(")
        v = self.expect_ident()
        if self.lookup(v.text, v) != "vertex":
            raise self.error(f"Global.apply expects a vertex, {v.text!r} is not one", v)
        self.expect(",")
        s = self.tok
        if s.kind != "str":
            raise self.error("Global.apply expects a type string")
        self.advance()
        self.expect(")")
        self.expect(";")
        return Apply(v.text, s.text[1:-1], t.line, t.col)

    # expressions
    def expr(self):
        left = self.additive()
        if self.tok.kind == "op" and self.tok.text in CMP_OPS:
            t = self.advance()
            right = self.additive()
            left = BinOp(t.text, left, right, t.line, t.col)
            if self.tok.kind == "op" and self.tok.text in CMP_OPS:
                raise self.error("comparisons cannot be chained")
        return left

    def additive(self):
        left = self.term()
        while self.at("+") or self.at("-"):
            t = self.advance()
            left = BinOp(t.text, left, self.term(), t.line, t.col)
        return left

    def term(self):
        left = self.unary()
        while self.at("*") or self.at("/"):
            t = self.advance()
            left = BinOp(t.text, left, self.unary(), t.line, t.col)
        return left

    def unary(self):
        if self.at("-"):
            t = self.advance()
            return Neg(self.unary(), t.line, t.col)
        return self.postfix()

    def postfix(self):
        t = self.tok
        if t.kind == "num":
            self.advance()
            is_int = re.fullmatch(r"\d+", t.text) is not None
            return Num(int(t.text) if is_int else float(t.text), is_int, t.line, t.col)
        if self.at("("):
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        if t.kind == "ident" and t.text in GRAPH_CONSTANTS:
            self.advance()
            return Const(t.text, t.line, t.col)
        if t.kind != "ident" or t.text in KEYWORDS:
            raise self.error(f"unexpected {t.text or 'end of input'!r} in expression")
        self.advance()
        node = Name(t.text, self.lookup(t.text, t), t.line, t.col)
        kind = node.kind
        while self.at("."):
            self.advance()
            a = self.tok
            if a.kind != "ident":
                raise self.error("expected property name after '.'")
            allowed = VERTEX_PROPS if kind == "vertex" else EDGE_PROPS if kind == "edge" else ()
            if a.text not in allowed:
                raise self.error(f"{kind} {t.text!r} has no property {a.text!r}", a, UnknownSymbolError)
            self.advance()
            node = Prop(node, a.text, a.line, a.col)
            kind = "vertex" if a.text in ("src", "dst") else "value"
        return node


def parse(source: str) -> Program:
    """Parse ``.gpc`` source into a :class:`Program`."""
    return _Parser(source).program()


# --- canonical printer -------------------------------------------------------

_PREC = {"==": 1, "!=": 1, "<": 1, "<=": 1, ">": 1, ">=": 1, "+": 2, "-": 2, "*": 3, "/": 3}


def format_expr(e, prec: int = 0) -> str:
    if isinstance(e, Num):
        s = str(e.value) if e.is_int else repr(float(e.value))
    elif isinstance(e, Name):
        s = e.id
    elif isinstance(e, Const):
        s = e.name
    elif isinstance(e, Prop):
        s = f"{format_expr(e.base, 9)}.{e.attr}"
    elif isinstance(e, Neg):
        s = "-" + format_expr(e.operand, 4)
        return f"({s})" if prec > 4 else s
    elif isinstance(e, BinOp):
        p = _PREC[e.op]
        # left-associative: a right operand of equal precedence needs parentheses
        s = f"{format_expr(e.left, p if p > 1 else 2)} {e.op} {format_expr(e.right, p + 1)}"
        return f"({s})" if p < prec else s
    else:
        raise TypeError(f"not an expression: {e!r}")
    return s


def format_program(prog: Program, indent: str = "    ") -> str:
    lines: list[str] = []

    def emit(stmts, depth):
        pad = indent * depth
        for s in stmts:
            if isinstance(s, Decl):
                init = f" = {format_expr(s.init)}" if s.init is not None else ""
                lines.append(f"{pad}{s.type} {s.name}{init};")
            elif isinstance(s, Assign):
                lines.append(f"{pad}{format_expr(s.target)} = {format_expr(s.value)};")
            elif isinstance(s, ForEach):
                it = f"{s.iterator}({s.arg})" if s.arg is not None else s.iterator
                lines.append(f"{pad}for(list {s.var} in {it}){{")
                emit(s.body, depth + 1)
                lines.append(f"{pad}}}")
            elif isinstance(s, ForCount):
                lines.append(f"{pad}for({s.count}){{")
                emit(s.body, depth + 1)
                lines.append(f"{pad}}}")
            elif isinstance(s, If):
                lines.append(f"{pad}if({format_expr(s.cond)}){{")
                emit(s.body, depth + 1)
                lines.append(f"{pad}}}")
            elif isinstance(s, Apply):
                lines.append(f'{pad}Global.apply({s.target}, "{s.tag}");')
            else:
                raise TypeError(f"not a statement: {s!r}")

    emit(prog.body, 0)
    return "\n".join(lines) + ("\n" if lines else "")
