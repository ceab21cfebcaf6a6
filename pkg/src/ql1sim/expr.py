"""Coefficient expressions: a small recursive-descent parser, printer and evaluator.

Grammar (whitespace insensitive)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := primary ('^' expo)?
    expo    := '-' expo | power
    primary := NUMBER | 'tau' | 'pi' | FUNC '(' expr ')' | '(' expr ')'
    FUNC    := sin | cos | exp | sqrt | abs

``^`` binds tighter than unary minus, so ``-2^2`` is ``-(2^2)``; it is
right-associative. Evaluation is vectorized over numpy arrays of ``tau``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import ParseError

FUNCTIONS = ("sin", "cos", "exp", "sqrt", "abs")
BINARY_OPS = ("+", "-", "*", "/", "^")


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Pi:
    pass


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class Call:
    fn: str
    arg: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


Expr = Union[Num, Var, Pi, Neg, Call, BinOp]

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            if text[pos:].strip() == "":
                break
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                bad = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
                raise ParseError(f"unexpected character {text[bad]!r}", bad, ("number", "name", "operator"))
            kind = m.lastgroup
            start = m.start(kind)
            self.tokens.append((kind, m.group(kind), start))
            pos = m.end()
        self.tokens.append(("end", "", len(text)))
        self.i = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.i]

    def take(self) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str) -> None:
        kind, val, off = self.take()
        if kind != "op" or val != op:
            raise ParseError(f"unexpected {val or 'end of input'!r}", off, (op,))

    def parse(self) -> Expr:
        node = self.expr()
        kind, val, off = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {val!r}", off, ("+", "-", "*", "/", "^", "end of input"))
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Expr:
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.primary()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            return BinOp("^", base, self.expo())
        return base

    def expo(self) -> Expr:
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return Neg(self.expo())
        return self.power()

    def primary(self) -> Expr:
        kind, val, off = self.take()
        if kind == "num":
            return Num(float(val))
        if kind == "name":
            if val == "tau":
                return Var()
            if val == "pi":
                return Pi()
            if val in FUNCTIONS:
                self.expect_op("(")
                inner = self.expr()
                self.expect_op(")")
                return Call(val, inner)
            raise ParseError(f"unknown name {val!r}", off, ("tau", "pi") + FUNCTIONS)
        if kind == "op" and val == "(":
            inner = self.expr()
            self.expect_op(")")
            return inner
        raise ParseError(
            f"unexpected {val or 'end of input'!r}", off, ("number", "tau", "pi", "(", "-") + FUNCTIONS
        )


def parse_coeff_expr(text: str) -> Expr:
    """Parse ``text`` into an expression tree, raising :class:`ParseError`."""
    if not text or not text.strip():
        raise ParseError("empty expression", 0, ("number", "tau", "pi", "("))
    return _Parser(text).parse()


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _fmt(node: Expr) -> tuple[str, int]:
    # Returns (text, precedence); atoms are 5, powers 4, negation 3.
    if isinstance(node, Num):
        return repr(float(node.value)), 5
    if isinstance(node, Var):
        return "tau", 5
    if isinstance(node, Pi):
        return "pi", 5
    if isinstance(node, Call):
        return f"{node.fn}({_fmt(node.arg)[0]})", 5
    if isinstance(node, Neg):
        s, p = _fmt(node.arg)
        return "-" + (s if p >= 3 else f"({s})"), 3
    if isinstance(node, BinOp):
        ls, lp = _fmt(node.left)
        rs, rp = _fmt(node.right)
        if node.op == "^":
            left = ls if lp == 5 else f"({ls})"
            right = rs if rp >= 3 else f"({rs})"
            return f"{left}^{right}", 4
        prec = _PREC[node.op]
        left = ls if lp >= prec else f"({ls})"
        right = rs if rp > prec else f"({rs})"
        return f"{left}{node.op}{right}", prec
    raise TypeError(f"not an expression node: {node!r}")


def format_expr(node: Expr) -> str:
    """Render with the minimum parentheses needed to parse back to ``node``."""
    return _fmt(node)[0]


_UNARY = {"sin": np.sin, "cos": np.cos, "exp": np.exp, "sqrt": np.sqrt, "abs": np.abs}


def evaluate(node: Expr, tau) -> np.ndarray | float:
    """Evaluate at ``tau`` (scalar or array); result broadcasts to ``tau``'s shape."""
    tau = np.asarray(tau, dtype=float)
    with np.errstate(all="ignore"):
        out = _eval(node, tau)
    return np.broadcast_to(out, tau.shape).astype(float) if tau.ndim else float(out)


def _eval(node: Expr, tau: np.ndarray):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return tau
    if isinstance(node, Pi):
        return math.pi
    if isinstance(node, Neg):
        return -_eval(node.arg, tau)
    if isinstance(node, Call):
        return _UNARY[node.fn](_eval(node.arg, tau))
    a, b = _eval(node.left, tau), _eval(node.right, tau)
    op = node.op
    if op == "+":
        return np.add(a, b)
    if op == "-":
        return np.subtract(a, b)
    if op == "*":
        return np.multiply(a, b)
    if op == "/":
        return np.divide(a, b)
    return np.power(np.asarray(a, dtype=float), b)


class CoeffFunction:
    """Callable wrapper around a parsed expression, keeping its source text."""

    def __init__(self, text: str):
        self.text = text
        self.tree = parse_coeff_expr(text)

    def __call__(self, tau):
        return evaluate(self.tree, tau)

    def __repr__(self) -> str:
        return f"CoeffFunction({self.text!r})"
