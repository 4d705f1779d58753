"""Scalar expressions over chart coordinates.

Grammar, loosest to tightest::

    expr   := expr ('+' | '-') expr
            | expr ('*' | '/') expr
            | '-' expr
            | expr '^' expr          (right-associative)
            | NUMBER | NAME | NAME '(' expr ')' | '(' expr ')'

Evaluation is generic: an :class:`Expression` called on plain floats returns
a float, called on :class:`~sigflip.dual.DualScalar` coordinates it returns
the value together with its exact gradient.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from sigflip import dual
from sigflip.dual import DualScalar, value_of
from sigflip.errors import ArityError, DomainError, ExpressionSyntaxError, UnknownIdentifier

FUNCTIONS = ("sin", "cos", "exp", "sqrt", "tanh", "abs")
CONSTANTS = {"pi": math.pi, "e": math.e}


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class NamedConst:
    name: str


@dataclass(frozen=True)
class Var:
    name: str
    index: int


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


Node = Union[Const, NamedConst, Var, Neg, BinOp, Call]


# ---------------------------------------------------------------------------
# tokenizer

_TOKEN_RE = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),])"
    r")"
)


@dataclass(frozen=True)
class _Token:
    kind: str  # num, name, op, end
    text: str
    offset: int  # byte offset into the UTF-8 source


def _tokenize(source: str) -> list[_Token]:
    tokens = []
    pos = 0

    def byte_offset(i: int) -> int:
        return len(source[:i].encode("utf-8"))

    while True:
        m = _TOKEN_RE.match(source, pos)
        start = m.end() if m else pos
        if m is None or m.lastgroup is None:
            # only whitespace matched (or nothing)
            rest = source[pos:].lstrip()
            if not rest:
                tokens.append(_Token("end", "", byte_offset(len(source))))
                return tokens
            bad = len(source) - len(rest)
            raise ExpressionSyntaxError(f"unexpected character {source[bad]!r}", byte_offset(bad))
        kind = m.lastgroup
        tokens.append(_Token(kind, m.group(kind), byte_offset(m.start(kind))))
        pos = start


# ---------------------------------------------------------------------------
# Pratt parser

_INFIX_BP = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 30}
_PREFIX_NEG_BP = 25


class _Parser:
    def __init__(self, source: str, coords: Sequence[str]) -> None:
        self.tokens = _tokenize(source)
        self.pos = 0
        self.coords = list(coords)

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, text: str) -> _Token:
        tok = self.advance()
        if tok.text != text or tok.kind != "op":
            found = "end of input" if tok.kind == "end" else repr(tok.text)
            raise ExpressionSyntaxError(f"expected {text!r}, found {found}", tok.offset)
        return tok

    def expression(self, rbp: int = 0) -> Node:
        left = self.nud(self.advance())
        while True:
            tok = self.peek()
            lbp = _INFIX_BP.get(tok.text, 0) if tok.kind == "op" else 0
            if tok.kind not in ("op", "end"):
                raise ExpressionSyntaxError(f"unexpected {tok.text!r}", tok.offset)
            if rbp >= lbp:
                return left
            self.advance()
            if tok.text == "^":
                right = self.expression(_INFIX_BP["^"] - 1)
            else:
                right = self.expression(lbp)
            left = BinOp(tok.text, left, right)

    def nud(self, tok: _Token) -> Node:
        if tok.kind == "num":
            value = float(tok.text)
            if not math.isfinite(value):
                raise ExpressionSyntaxError(f"literal {tok.text!r} overflows", tok.offset)
            return Const(value)
        if tok.kind == "name":
            return self.name(tok)
        if tok.kind == "op" and tok.text == "-":
            return Neg(self.expression(_PREFIX_NEG_BP))
        if tok.kind == "op" and tok.text == "(":
            inner = self.expression(0)
            self.expect(")")
            return inner
        found = "end of input" if tok.kind == "end" else repr(tok.text)
        raise ExpressionSyntaxError(f"unexpected {found}", tok.offset)

    def name(self, tok: _Token) -> Node:
        name = tok.text
        nxt = self.peek()
        if name in FUNCTIONS and nxt.kind == "op" and nxt.text == "(":
            self.advance()
            args = []
            if not (self.peek().kind == "op" and self.peek().text == ")"):
                args.append(self.expression(0))
                while self.peek().kind == "op" and self.peek().text == ",":
                    self.advance()
                    args.append(self.expression(0))
            self.expect(")")
            if len(args) != 1:
                raise ArityError(f"{name} takes exactly 1 argument, got {len(args)}")
            return Call(name, args[0])
        if name in self.coords:
            return Var(name, self.coords.index(name))
        if name in CONSTANTS:
            return NamedConst(name)
        if name in FUNCTIONS:
            raise ArityError(f"{name} takes exactly 1 argument, got 0")
        raise UnknownIdentifier(name, tok.offset)


# ---------------------------------------------------------------------------
# printing


def to_source(node: Node) -> str:
    """Canonical, fully parenthesized source text for ``node``."""
    if isinstance(node, Const):
        return repr(node.value)
    if isinstance(node, NamedConst):
        return node.name
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return f"(-{to_source(node.operand)})"
    if isinstance(node, BinOp):
        return f"({to_source(node.left)} {node.op} {to_source(node.right)})"
    if isinstance(node, Call):
        return f"{node.func}({to_source(node.arg)})"
    raise TypeError(f"not an expression node: {node!r}")


# ---------------------------------------------------------------------------
# evaluation


def _is_integral(x: float) -> bool:
    return math.isfinite(x) and x == math.floor(x) and abs(x) < 2**31


def _power(node: BinOp, base, exponent):
    bv, ev = value_of(base), value_of(exponent)
    const_exp = not isinstance(exponent, DualScalar)
    if const_exp and _is_integral(ev):
        if bv == 0.0 and ev < 0:
            raise DomainError("zero raised to a negative power", node)
        return dual.ipow(base, int(ev))
    if bv < 0.0:
        raise DomainError("negative base with non-integer exponent", node)
    if bv == 0.0:
        if not const_exp or ev < 0 or (isinstance(base, DualScalar) and ev < 1):
            raise DomainError("power not differentiable at zero base", node)
        if isinstance(base, DualScalar):
            return DualScalar(0.0, 0.0 * base.gradient)
        return 0.0
    return dual.rpow(base, exponent)


def _call(node: Call, arg):
    v = value_of(arg)
    f = node.func
    if f == "sqrt":
        if v < 0.0:
            raise DomainError("sqrt of negative value", node)
        if v == 0.0 and isinstance(arg, DualScalar):
            raise DomainError("sqrt not differentiable at 0", node)
        return dual.sqrt(arg)
    if f == "sin":
        return dual.sin(arg)
    if f == "cos":
        return dual.cos(arg)
    if f == "exp":
        return dual.exp(arg)
    if f == "tanh":
        return dual.tanh(arg)
    if f == "abs":
        return abs(arg)
    raise DomainError(f"unknown function {f}", node)


def _eval(node: Node, coords):
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Var):
        return coords[node.index]
    if isinstance(node, NamedConst):
        return CONSTANTS[node.name]
    if isinstance(node, Neg):
        return -_eval(node.operand, coords)
    if isinstance(node, Call):
        return _call(node, _eval(node.arg, coords))
    a = _eval(node.left, coords)
    b = _eval(node.right, coords)
    op = node.op
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        if value_of(b) == 0.0:
            raise DomainError("division by zero", node)
        return a / b
    return _power(node, a, b)


class Expression:
    """Immutable parsed expression; callable on floats or dual coordinates."""

    __slots__ = ("root", "coords", "source")

    def __init__(self, root: Node, coords: Sequence[str], source: str | None = None) -> None:
        self.root = root
        self.coords = tuple(coords)
        self.source = source if source is not None else to_source(root)

    def __call__(self, x):
        try:
            return _eval(self.root, x)
        except OverflowError as exc:
            raise DomainError(f"overflow evaluating {self.source!r}", self.root) from exc

    def evaluate(self, point: Sequence[float]) -> float:
        return float(self([float(c) for c in point]))

    def __eq__(self, other) -> bool:
        return isinstance(other, Expression) and self.root == other.root and self.coords == other.coords

    def __hash__(self) -> int:
        return hash((self.root, self.coords))

    def __repr__(self) -> str:
        return f"Expression({self.source!r})"

    def __str__(self) -> str:
        return to_source(self.root)


def parse(source: str, coords: Sequence[str]) -> Expression:
    if not source or not source.strip():
        raise ExpressionSyntaxError("empty expression", 0)
    parser = _Parser(source, coords)
    root = parser.expression(0)
    tok = parser.peek()
    if tok.kind != "end":
        raise ExpressionSyntaxError(f"unexpected {tok.text!r}", tok.offset)
    return Expression(root, coords, source)


def eval_dual(e, point: Sequence[float]) -> DualScalar:
    """Value and exact gradient of a scalar field at ``point``."""
    out = e(dual.seed(point))
    return dual.promote(out, len(point))


def central_difference(fn, point: Sequence[float], h: float = 1e-6) -> np.ndarray:
    """Central finite-difference gradient of a float-valued ``fn(point)``."""
    p = np.asarray(point, dtype=float)
    grad = np.empty_like(p)
    for i in range(p.size):
        step = np.zeros_like(p)
        step[i] = h
        grad[i] = (fn(p + step) - fn(p - step)) / (2.0 * h)
    return grad
