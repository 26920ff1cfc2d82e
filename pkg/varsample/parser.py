#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""Text format for polynomial systems

    # comment
    vars: x1 x2
    dim: 1            (optional, defaults to N - number of polynomials)
    x1^2 + x2^2 - 1

One polynomial per line; operators ``+ - * ^`` and parentheses; decimal
literals (an exponent part such as ``1e-07`` is accepted). Whitespace is not
significant.
"""

from __future__ import annotations

import re
from pathlib import Path
from typing import List, NamedTuple, Optional, Sequence, Union

from varsample.exceptions import PolynomialSyntaxError, UndeclaredVariableError
from varsample.polysys import Polynomial, PolynomialSystem

_TOKEN_RE = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*^()])"
)
_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*$")

SYSTEMS_DIR = Path(__file__).parent / "systems"


class Token(NamedTuple):
    kind: str
    text: str
    column: int


def tokenize(line: str, lineno: int) -> List[Token]:
    tokens = []
    pos = 0
    while pos < len(line):
        m = _TOKEN_RE.match(line, pos)
        if m is None:
            raise PolynomialSyntaxError(f"unexpected character {line[pos]!r}", lineno, pos + 1)
        if m.lastgroup != "ws":
            tokens.append(Token(m.lastgroup, m.group(), pos + 1))
        pos = m.end()
    tokens.append(Token("end", "", len(line) + 1))
    return tokens


class _ExpressionParser:
    """Recursive descent over the tokens of one line."""

    def __init__(self, tokens: List[Token], names: Sequence[str], lineno: int):
        self.tokens = tokens
        self.index = {name: i for i, name in enumerate(names)}
        self.num_vars = len(names)
        self.lineno = lineno
        self.pos = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    def error(self, message: str, token: Optional[Token] = None) -> PolynomialSyntaxError:
        token = token or self.current
        return PolynomialSyntaxError(message, self.lineno, token.column)

    def advance(self) -> Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def parse(self) -> Polynomial:
        poly = self.expression()
        if self.current.kind != "end":
            raise self.error(f"unexpected {self.current.text!r}")
        return poly

    def expression(self) -> Polynomial:
        poly = self.term()
        while self.current.text in ("+", "-"):
            op = self.advance().text
            rhs = self.term()
            poly = poly + rhs if op == "+" else poly - rhs
        return poly

    def term(self) -> Polynomial:
        poly = self.unary()
        while self.current.text == "*":
            self.advance()
            poly = poly * self.unary()
        return poly

    def unary(self) -> Polynomial:
        if self.current.text == "-":
            self.advance()
            return -self.unary()
        if self.current.text == "+":
            self.advance()
            return self.unary()
        return self.power()

    def power(self) -> Polynomial:
        base = self.atom()
        if self.current.text != "^":
            return base
        self.advance()
        token = self.current
        if token.kind != "number" or not token.text.isdigit():
            raise self.error("exponent must be a non-negative integer literal")
        self.advance()
        if self.current.text == "^":
            raise self.error("chained exponents are ambiguous, use parentheses")
        return base ** int(token.text)

    def atom(self) -> Polynomial:
        token = self.current
        if token.kind == "number":
            self.advance()
            return Polynomial.constant(float(token.text), self.num_vars)
        if token.kind == "name":
            self.advance()
            if token.text not in self.index:
                raise UndeclaredVariableError(f"undeclared variable {token.text!r}", self.lineno, token.column)
            return Polynomial.variable(self.index[token.text], self.num_vars)
        if token.text == "(":
            self.advance()
            poly = self.expression()
            if self.current.text != ")":
                raise self.error("expected ')'")
            self.advance()
            return poly
        if token.kind == "end":
            raise self.error("unexpected end of line")
        raise self.error(f"unexpected {token.text!r}")


def parse(text: str, var_names: Optional[Sequence[str]] = None, dim: Optional[int] = None) -> PolynomialSystem:
    """Parse the system text format.

    ``var_names``/``dim`` act as defaults when the text has no header lines.
    """
    names = list(var_names) if var_names is not None else None
    declared_dim = dim
    bodies = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        stripped = line.strip()
        if not stripped:
            continue
        key, sep, rest = stripped.partition(":")
        if sep and key.strip() == "vars":
            names = rest.replace(",", " ").split()
            for name in names:
                if not _NAME_RE.match(name):
                    raise PolynomialSyntaxError(f"invalid variable name {name!r}", lineno, line.index(name) + 1)
            if len(set(names)) != len(names):
                raise PolynomialSyntaxError("duplicate variable name", lineno, 1)
            continue
        if sep and key.strip() == "dim":
            try:
                declared_dim = int(rest.strip())
            except ValueError:
                raise PolynomialSyntaxError(f"invalid dimension {rest.strip()!r}", lineno, line.index(":") + 2)
            continue
        bodies.append((lineno, line))

    if not names:
        raise PolynomialSyntaxError("missing 'vars:' header", 1, 1)
    polys = [_ExpressionParser(tokenize(line, lineno), names, lineno).parse() for lineno, line in bodies]
    return PolynomialSystem(polys, num_vars=len(names), dim=declared_dim, var_names=names)


def parse_file(path: Union[str, Path]) -> PolynomialSystem:
    return parse(Path(path).read_text(encoding="utf-8"))


def available_examples() -> List[str]:
    return sorted(p.stem for p in SYSTEMS_DIR.glob("*.txt"))


def load_example(name: str) -> PolynomialSystem:
    """Load one of the bundled systems, e.g. ``load_example("torus")``."""
    path = SYSTEMS_DIR / f"{name}.txt"
    if not path.exists():
        raise FileNotFoundError(f"no bundled system {name!r}; available: {', '.join(available_examples())}")
    return parse_file(path)
