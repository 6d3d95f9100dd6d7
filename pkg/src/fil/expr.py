"""Minimal arithmetic expression grammar for CLI-supplied grid functions.

Supported: + - * / ^, parentheses, unary minus, sin, cos, exp, the variable
x, and numeric literals. General code is refused on purpose: runs stay
reproducible and reports stay self-describing.
"""

from __future__ import annotations

import re

import numpy as np

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_]+)"
    r"|(?P<op>[-+*/^()]))"
)

_FUNCTIONS = {"sin": np.sin, "cos": np.cos, "exp": np.exp}


class ExprError(ValueError):
    """Malformed expression."""


def _tokenize(text: str) -> list[tuple[str, str]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ExprError(f"unexpected character at {text[pos:]!r}")
        pos = m.end()
        for kind in ("num", "name", "op"):
            val = m.group(kind)
            if val is not None:
                tokens.append((kind, val))
                break
    tokens.append(("end", ""))
    return tokens


class _Parser:
    def __init__(self, tokens: list[tuple[str, str]]):
        self.tokens = tokens
        self.i = 0

    def peek(self) -> tuple[str, str]:
        return self.tokens[self.i]

    def take(self) -> tuple[str, str]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, op: str) -> None:
        kind, val = self.take()
        if kind != "op" or val != op:
            raise ExprError(f"expected {op!r}, got {val!r}")

    # expr := term (('+'|'-') term)*
    def expr(self):
        node = self.term()
        while self.peek() == ("op", "+") or self.peek() == ("op", "-"):
            _, op = self.take()
            rhs = self.term()
            node = (lambda a, b: (lambda x: a(x) + b(x)))(node, rhs) if op == "+" else (
                lambda a, b: (lambda x: a(x) - b(x))
            )(node, rhs)
        return node

    # term := factor (('*'|'/') factor)*
    def term(self):
        node = self.factor()
        while self.peek() == ("op", "*") or self.peek() == ("op", "/"):
            _, op = self.take()
            rhs = self.factor()
            node = (lambda a, b: (lambda x: a(x) * b(x)))(node, rhs) if op == "*" else (
                lambda a, b: (lambda x: a(x) / b(x))
            )(node, rhs)
        return node

    # factor := ('-'|'+') factor | power, so -x^2 means -(x^2)
    def factor(self):
        if self.peek() == ("op", "-"):
            self.take()
            inner = self.factor()
            return lambda x, a=inner: -a(x)
        if self.peek() == ("op", "+"):
            self.take()
            return self.factor()
        return self.power()

    # power := atom ('^' factor)?   (right associative, signed exponents ok)
    def power(self):
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            exponent = self.factor()
            return lambda x, a=base, b=exponent: a(x) ** b(x)
        return base

    def atom(self):
        kind, val = self.take()
        if kind == "num":
            c = float(val)
            return lambda x, c=c: np.full_like(np.asarray(x, dtype=float), c)
        if kind == "name":
            if val == "x":
                return lambda x: np.asarray(x, dtype=float)
            if val in _FUNCTIONS:
                fn = _FUNCTIONS[val]
                self.expect("(")
                inner = self.expr()
                self.expect(")")
                return lambda x, a=inner, fn=fn: fn(a(x))
            raise ExprError(f"unknown name {val!r}")
        if kind == "op" and val == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        raise ExprError(f"unexpected token {val!r}")


def compile_expression(text: str):
    """Compile to a callable evaluating the expression on an array of x."""
    parser = _Parser(_tokenize(text))
    node = parser.expr()
    if parser.peek()[0] != "end":
        raise ExprError(f"trailing input after expression: {parser.peek()[1]!r}")
    return node
