"""Coefficient expression parser.

Grammar (whitespace ignored)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('+' | '-') unary | power
    power  := atom ('^' INT)?
    atom   := INT | NAME | '(' expr ')'

Division is only by nonzero constants and only over a Q base.
"""
from __future__ import annotations

import re

from ..errors import ParseError
from .rings import RingElement

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(\*\*|[-+*/^()]))")


def _tokenize(text):
    pos = 0
    tokens = []
    n = len(text)
    while pos < n:
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            # skip whitespace to report the offending character itself
            bad = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ParseError(f"unexpected character {text[bad]!r}", text, bad)
        start = m.start(m.lastindex)
        if m.group(1) is not None:
            tokens.append(("int", int(m.group(1)), start))
        elif m.group(2) is not None:
            tokens.append(("name", m.group(2), start))
        else:
            op = "^" if m.group(3) == "**" else m.group(3)
            tokens.append(("op", op, start))
        pos = m.end()
    tokens.append(("end", None, n))
    return tokens


class _Parser:
    def __init__(self, text, ring):
        self.text = text
        self.ring = ring
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, msg, tok=None):
        tok = tok or self.peek()
        raise ParseError(msg, self.text, tok[2])

    def parse(self):
        if self.peek()[0] == "end":
            self.fail("empty expression")
        value = self.expr()
        if self.peek()[0] != "end":
            self.fail(f"unexpected {self.peek()[1]!r}")
        return value

    def expr(self):
        value = self.term()
        while self.peek()[:2] in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self):
        value = self.unary()
        while self.peek()[:2] in (("op", "*"), ("op", "/")):
            tok = self.take()
            rhs = self.unary()
            if tok[1] == "*":
                value = value * rhs
                continue
            if self.ring.base == "Z":
                self.fail("fraction over integer base", tok)
            if not rhs.is_constant() or rhs.is_zero():
                self.fail("division only by a nonzero constant", tok)
            value = value * rhs.inverse()
        return value

    def unary(self):
        tok = self.peek()
        if tok[:2] == ("op", "-"):
            self.take()
            return -self.unary()
        if tok[:2] == ("op", "+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        value = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            tok = self.take()
            if tok[0] != "int":
                self.fail("exponent must be a non-negative integer", tok)
            value = value ** tok[1]
        return value

    def atom(self):
        tok = self.take()
        kind, val, pos = tok
        if kind == "int":
            return self.ring.constant(val)
        if kind == "name":
            if val not in self.ring.names:
                raise ParseError(f"unknown generator {val!r}", self.text, pos)
            return self.ring.gen(val)
        if tok[:2] == ("op", "("):
            value = self.expr()
            if self.peek()[:2] != ("op", ")"):
                self.fail("expected ')'")
            self.take()
            return value
        self.fail(f"unexpected {val!r}" if val is not None else "unexpected end of input", tok)


def parse_coeff(text, ring) -> RingElement:
    """Parse ``text`` into a canonical element of ``ring``.

    >>> from fgc.algebra.rings import GradedRing
    >>> str(parse_coeff("(u+1)^2", GradedRing("Z", (("u", 2),))))
    'u^2 + 2*u + 1'
    """
    return _Parser(str(text), ring).parse()
