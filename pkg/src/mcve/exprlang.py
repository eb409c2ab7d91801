"""Tiny arithmetic language for forward kernels in scenario files.

Grammar (``*`` and ``/`` bind tighter than ``+`` and ``-``; all binary
operators are left associative; unary minus binds tighter than any binary
operator)::

    expr  := term (("+" | "-") term)*
    term  := unary (("*" | "/") unary)*
    unary := "-" unary | atom
    atom  := NUMBER | IDENT | "(" expr ")"

There is no exponent operator and there are no function calls. Evaluation
works on floats and, elementwise, on numpy arrays. Division by zero raises
:class:`EvalError` instead of producing ``inf``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np

__all__ = [
    "ExprError",
    "LexError",
    "ParseError",
    "EvalError",
    "Token",
    "Num",
    "Var",
    "Neg",
    "BinOp",
    "Expr",
    "tokenize",
    "parse",
    "unparse",
    "evaluate",
    "free_variables",
]


class ExprError(ValueError):
    """Base class for expression errors."""


class LexError(ExprError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class ParseError(ExprError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class EvalError(ExprError):
    pass


@dataclass(frozen=True)
class Token:
    kind: str  # num, ident, plus, minus, times, divide, lparen, rparen
    value: Union[float, str, None]
    pos: int


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    left: "Expr"
    right: "Expr"


Expr = Union[Num, Var, Neg, BinOp]

_NUMBER = re.compile(r"(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_SINGLE = {
    "+": "plus",
    "-": "minus",
    "*": "times",
    "/": "divide",
    "(": "lparen",
    ")": "rparen",
}


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        ch = text[pos]
        if ch.isspace():
            pos += 1
            continue
        if ch in _SINGLE:
            tokens.append(Token(_SINGLE[ch], None, pos))
            pos += 1
            continue
        m = _NUMBER.match(text, pos)
        if m:
            tokens.append(Token("num", float(m.group()), pos))
            pos = m.end()
            continue
        m = _IDENT.match(text, pos)
        if m:
            tokens.append(Token("ident", m.group(), pos))
            pos = m.end()
            continue
        raise LexError(f"illegal character {ch!r}", pos)
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def end_pos(self):
        return len(self.text)

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def parse(self) -> Expr:
        if not self.tokens:
            raise ParseError("empty expression", 0)
        node = self.expr()
        tok = self.peek()
        if tok is not None:
            if tok.kind == "rparen":
                raise ParseError("unmatched ')'", tok.pos)
            raise ParseError(f"unexpected token {self.text[tok.pos]!r}", tok.pos)
        return node

    def expr(self) -> Expr:
        node = self.term()
        while (tok := self.peek()) is not None and tok.kind in ("plus", "minus"):
            self.advance()
            node = BinOp("+" if tok.kind == "plus" else "-", node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while (tok := self.peek()) is not None and tok.kind in ("times", "divide"):
            self.advance()
            node = BinOp("*" if tok.kind == "times" else "/", node, self.unary())
        return node

    def unary(self) -> Expr:
        tok = self.peek()
        if tok is not None and tok.kind == "minus":
            self.advance()
            return Neg(self.unary())
        return self.atom()

    def atom(self) -> Expr:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input", self.end_pos())
        if tok.kind == "num":
            self.advance()
            return Num(tok.value)
        if tok.kind == "ident":
            self.advance()
            return Var(tok.value)
        if tok.kind == "lparen":
            self.advance()
            node = self.expr()
            close = self.peek()
            if close is None:
                raise ParseError("unclosed parenthesis opened", tok.pos)
            if close.kind != "rparen":
                raise ParseError(f"expected ')' but found {self.text[close.pos]!r}", close.pos)
            self.advance()
            return node
        raise ParseError(f"unexpected token {self.text[tok.pos]!r}", tok.pos)


def parse(text: str) -> Expr:
    """Parse ``text`` into an expression tree."""
    return _Parser(text).parse()


def unparse(expr: Expr) -> str:
    """Fully parenthesised source text that parses back to ``expr``."""
    if isinstance(expr, Num):
        return repr(float(expr.value))
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, Neg):
        return f"-{_wrap(expr.operand)}"
    if isinstance(expr, BinOp):
        return f"({unparse(expr.left)} {expr.op} {unparse(expr.right)})"
    raise TypeError(f"not an expression node: {expr!r}")


def _wrap(expr: Expr) -> str:
    s = unparse(expr)
    return s if isinstance(expr, (Var, BinOp, Neg)) else f"({s})"


def evaluate(expr: Expr, bindings: Mapping[str, object]):
    """Evaluate ``expr``; bound values may be floats or numpy arrays."""
    if isinstance(expr, Num):
        return expr.value
    if isinstance(expr, Var):
        try:
            return bindings[expr.name]
        except KeyError:
            raise EvalError(f"unbound identifier {expr.name!r}") from None
    if isinstance(expr, Neg):
        return -evaluate(expr.operand, bindings)
    if isinstance(expr, BinOp):
        a = evaluate(expr.left, bindings)
        b = evaluate(expr.right, bindings)
        if expr.op == "+":
            return a + b
        if expr.op == "-":
            return a - b
        if expr.op == "*":
            return a * b
        if np.any(np.asarray(b) == 0):
            raise EvalError(f"division by zero in {unparse(expr)}")
        return a / b
    raise TypeError(f"not an expression node: {expr!r}")


def free_variables(expr: Expr) -> frozenset[str]:
    if isinstance(expr, Num):
        return frozenset()
    if isinstance(expr, Var):
        return frozenset([expr.name])
    if isinstance(expr, Neg):
        return free_variables(expr.operand)
    return free_variables(expr.left) | free_variables(expr.right)
