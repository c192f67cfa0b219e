"""Tiny arithmetic expression language for data functions q, h, g.

Grammar (whitespace insignificant):

    expr    := term (('+'|'-') term)*
    term    := unary (('*'|'/') unary)*
    unary   := '-' unary | power
    power   := atom ('^' unary)?          # right-associative, binds above unary minus
    atom    := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')'

Variables are x and (in 2D) y; functions are sin, cos, exp, tanh, sqrt, abs.
Evaluation is plain IEEE double precision and accepts numpy arrays.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np


class ExprSyntaxError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class ExprEvalError(ValueError):
    pass


FUNCTIONS = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "tanh": np.tanh,
    "sqrt": np.sqrt,
    "abs": np.abs,
}

VARIABLES = ("x", "y")


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expression"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expression"


Expression = Union[Num, Var, Neg, BinOp, Call]

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)
_NUM_RE = re.compile(r"(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?")


def _tokenize(text: str):
    tokens = []  # (kind, value, offset)
    pos = 0
    n = len(text)
    while pos < n:
        ws = re.match(r"\s*", text[pos:])
        pos += ws.end()
        if pos >= n:
            break
        m = _NUM_RE.match(text, pos)
        if m:
            tokens.append(("num", m.group(), pos))
            pos = m.end()
            continue
        m = re.compile(r"[A-Za-z_][A-Za-z_0-9]*").match(text, pos)
        if m:
            tokens.append(("ident", m.group(), pos))
            pos = m.end()
            continue
        ch = text[pos]
        if ch in "+-*/^()":
            tokens.append(("op", ch, pos))
            pos += 1
            continue
        raise ExprSyntaxError(f"unexpected character {ch!r}", pos)
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str):
        kind, val, off = self.peek()
        if kind != "op" or val != op:
            raise ExprSyntaxError(f"expected {op!r}", off)
        return self.advance()

    def parse(self) -> Expression:
        node = self.expr()
        kind, val, off = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected trailing input {val!r}", off)
        return node

    def expr(self) -> Expression:
        node = self.term()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.advance()
                node = BinOp(val, node, self.term())
            else:
                return node

    def term(self) -> Expression:
        node = self.unary()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "*/":
                self.advance()
                node = BinOp(val, node, self.unary())
            else:
                return node

    def unary(self) -> Expression:
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expression:
        base = self.atom()
        kind, val, _ = self.peek()
        if kind == "op" and val == "^":
            self.advance()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Expression:
        kind, val, off = self.advance()
        if kind == "num":
            return Num(float(val))
        if kind == "ident":
            if val in VARIABLES:
                return Var(val)
            if val in FUNCTIONS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return Call(val, arg)
            raise ExprSyntaxError(f"unknown identifier {val!r}", off)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        raise ExprSyntaxError(f"unexpected token {val!r}" if val else "unexpected end of input", off)


def parse(text: str) -> Expression:
    """Parse an expression string into an immutable tree."""
    return _Parser(text).parse()


def evaluate(e: Expression, env: Mapping[str, object]):
    """Evaluate a tree over scalars or numpy arrays bound to x (and y)."""
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        try:
            return env[e.name]
        except KeyError:
            raise ExprEvalError(f"variable {e.name!r} not supplied") from None
    if isinstance(e, Neg):
        return -evaluate(e.operand, env)
    if isinstance(e, Call):
        arg = evaluate(e.arg, env)
        with np.errstate(invalid="ignore", over="ignore"):
            out = FUNCTIONS[e.func](arg)
        _check_finite(out, f"{e.func}()")
        return out
    if isinstance(e, BinOp):
        a = evaluate(e.left, env)
        b = evaluate(e.right, env)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            if e.op == "+":
                out = a + b
            elif e.op == "-":
                out = a - b
            elif e.op == "*":
                out = a * b
            elif e.op == "/":
                out = np.divide(a, b)
            elif e.op == "^":
                out = np.power(a, b)
            else:  # pragma: no cover
                raise AssertionError(e.op)
        _check_finite(out, f"operator {e.op!r}")
        return out
    raise TypeError(f"not an expression node: {e!r}")


def _check_finite(value, what: str) -> None:
    if not np.all(np.isfinite(value)):
        raise ExprEvalError(f"non-finite result from {what}")


_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def pretty(e: Expression) -> str:
    """Render a tree back to a string; pretty(parse(pretty(t))) is idempotent."""
    return _pretty(e, 0)


def _pretty(e: Expression, parent_prec: int) -> str:
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Call):
        return f"{e.func}({_pretty(e.arg, 0)})"
    if isinstance(e, Neg):
        inner = _pretty(e.operand, _PRECEDENCE["neg"])
        text = f"-{inner}"
        return f"({text})" if parent_prec > _PRECEDENCE["neg"] else text
    if isinstance(e, BinOp):
        prec = _PRECEDENCE[e.op]
        # left-assoc chains re-parse identically with prec/prec+1 splits;
        # ^ is right-assoc so the sides flip
        if e.op == "^":
            left = _pretty(e.left, prec + 1)
            right = _pretty(e.right, prec)
        else:
            left = _pretty(e.left, prec)
            right = _pretty(e.right, prec + 1)
        text = f"{left} {e.op} {right}"
        return f"({text})" if parent_prec > prec else text
    raise TypeError(f"not an expression node: {e!r}")


def is_constant(e: Expression) -> bool:
    """True when the tree references no variables."""
    if isinstance(e, Num):
        return True
    if isinstance(e, Var):
        return False
    if isinstance(e, Neg):
        return is_constant(e.operand)
    if isinstance(e, Call):
        return is_constant(e.arg)
    if isinstance(e, BinOp):
        return is_constant(e.left) and is_constant(e.right)
    raise TypeError(f"not an expression node: {e!r}")
