"""Small arithmetic expression language for formula components.

Supports the single variable ``t``, the constant ``pi``, the operators
``+ - * / ^`` (with unary minus), parentheses, and the functions
sin cos tan sqrt exp ln abs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ExpressionSyntaxError

_FUNCTIONS = {
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "sqrt": math.sqrt,
    "exp": math.exp,
    "ln": math.log,
    "abs": abs,
}

_OPS = set("+-*/^()")


@dataclass(frozen=True)
class _Token:
    kind: str  # "num" | "name" | one of the operator characters | "end"
    text: str
    pos: int
    value: float = 0.0


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c in _OPS:
            tokens.append(_Token(c, c, i))
            i += 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            while j < n and (text[j].isdigit() or text[j] == "."):
                j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    j = k
                    while j < n and text[j].isdigit():
                        j += 1
            lit = text[i:j]
            try:
                value = float(lit)
            except ValueError:
                raise ExpressionSyntaxError(f"bad number literal {lit!r}", i)
            tokens.append(_Token("num", lit, i, value))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(_Token("name", text[i:j], i))
            i = j
            continue
        raise ExpressionSyntaxError(f"unexpected character {c!r}", i)
    tokens.append(_Token("end", "", n))
    return tokens


class Expr:
    """A parsed expression; evaluate with a binding for ``t``."""

    def __init__(self, node, source: str):
        self._node = node
        self.source = source

    def evaluate(self, t: float) -> float:
        return _eval(self._node, float(t))


def _eval(node, t: float) -> float:
    op = node[0]
    if op == "num":
        return node[1]
    if op == "t":
        return t
    if op == "neg":
        return -_eval(node[1], t)
    if op == "call":
        return _FUNCTIONS[node[1]](_eval(node[2], t))
    a = _eval(node[1], t)
    b = _eval(node[2], t)
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        return a / b
    return math.pow(a, b)  # "^"


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.i = 0

    @property
    def cur(self) -> _Token:
        return self.tokens[self.i]

    def eat(self, kind: str) -> _Token:
        tok = self.cur
        if tok.kind != kind:
            raise ExpressionSyntaxError(
                f"expected {kind!r}, found {tok.text or 'end of input'!r}", tok.pos)
        self.i += 1
        return tok

    def parse(self):
        node = self.sum_()
        if self.cur.kind != "end":
            raise ExpressionSyntaxError(
                f"unexpected {self.cur.text!r}", self.cur.pos)
        return node

    def sum_(self):
        node = self.product()
        while self.cur.kind in ("+", "-"):
            op = self.eat(self.cur.kind).kind
            node = (op, node, self.product())
        return node

    def product(self):
        node = self.unary()
        while self.cur.kind in ("*", "/"):
            op = self.eat(self.cur.kind).kind
            node = (op, node, self.unary())
        return node

    def unary(self):
        if self.cur.kind == "-":
            self.eat("-")
            return ("neg", self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.cur.kind == "^":
            self.eat("^")
            return ("^", base, self.unary())  # right-associative
        return base

    def atom(self):
        tok = self.cur
        if tok.kind == "num":
            self.eat("num")
            return ("num", tok.value)
        if tok.kind == "(":
            self.eat("(")
            node = self.sum_()
            self.eat(")")
            return node
        if tok.kind == "name":
            name = tok.text.lower()
            self.eat("name")
            if name == "t":
                return ("t",)
            if name == "pi":
                return ("num", math.pi)
            if name in _FUNCTIONS:
                self.eat("(")
                arg = self.sum_()
                self.eat(")")
                return ("call", name, arg)
            raise ExpressionSyntaxError(f"unknown name {tok.text!r}", tok.pos)
        raise ExpressionSyntaxError(
            f"expected a value, found {tok.text or 'end of input'!r}", tok.pos)


def parse_expression(text: str) -> Expr:
    """Parse ``text``; raises ExpressionSyntaxError with a position."""
    return Expr(_Parser(_tokenize(text)).parse(), text)
