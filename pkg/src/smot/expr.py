"""Reward mini-language: ``f(x, y)`` from text.

Grammar (standard precedence, ``^`` right-associative, unary minus binds
looser than ``^`` so ``-x^2 == -(x^2)``)::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := ("+" | "-") unary | power
    power  := atom ("^" unary)?
    atom   := NUMBER | "x" | "y" | FUNC "(" expr ")" | "(" expr ")"
    FUNC   := exp | tanh | sqrt | abs
"""

from __future__ import annotations

import math
import re
from typing import Callable

from .errors import ParseError

Fn = Callable[[float, float], float]

FUNCTIONS: dict[str, Callable[[float], float]] = {
    "exp": math.exp,
    "tanh": math.tanh,
    "sqrt": math.sqrt,
    "abs": abs,
}

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)


def tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            bad = len(text) - len(text[pos:].lstrip())
            raise ParseError(f"unexpected character {text[bad]!r} at position {bad}")
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.i]

    def take(self, value: str | None = None) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        if value is not None and tok[1] != value:
            raise ParseError(f"expected {value!r} at position {tok[2]}, found {tok[1] or 'end of input'!r}")
        self.i += 1
        return tok

    def parse(self) -> Fn:
        node = self.expr()
        kind, value, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {value!r} at position {pos}")
        return node

    def expr(self) -> Fn:
        node = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            rhs = self.term()
            node = _bin(op, node, rhs)
        return node

    def term(self) -> Fn:
        node = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            rhs = self.unary()
            node = _bin(op, node, rhs)
        return node

    def unary(self) -> Fn:
        if self.peek()[1] == "-":
            self.take()
            inner = self.unary()
            return lambda x, y: -inner(x, y)
        if self.peek()[1] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Fn:
        base = self.atom()
        if self.peek()[1] == "^":
            self.take()
            exponent = self.unary()
            return _bin("^", base, exponent)
        return base

    def atom(self) -> Fn:
        kind, value, pos = self.take()
        if kind == "num":
            c = float(value)
            return lambda x, y: c
        if kind == "name":
            if value == "x":
                return lambda x, y: x
            if value == "y":
                return lambda x, y: y
            if value in FUNCTIONS:
                fn = FUNCTIONS[value]
                self.take("(")
                arg = self.expr()
                self.take(")")
                return lambda x, y: fn(arg(x, y))
            raise ParseError(f"unknown name {value!r} at position {pos}")
        if value == "(":
            node = self.expr()
            self.take(")")
            return node
        raise ParseError(f"unexpected {value or 'end of input'!r} at position {pos}")


def _bin(op: str, a: Fn, b: Fn) -> Fn:
    if op == "+":
        return lambda x, y: a(x, y) + b(x, y)
    if op == "-":
        return lambda x, y: a(x, y) - b(x, y)
    if op == "*":
        return lambda x, y: a(x, y) * b(x, y)
    if op == "/":
        return lambda x, y: a(x, y) / b(x, y)
    return lambda x, y: a(x, y) ** b(x, y)


def parse_expression(text: str) -> Fn:
    """Compile ``text`` into a function of ``(x, y)``; raises ``ParseError``."""
    return _Parser(text).parse()
