"""Text grammar for scalar expressions.

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('+' | '-') unary | power
    power  := atom ('^' ['-'] INTEGER)?
    atom   := INTEGER | IDENT | '(' expr ')'

Identifiers are the phase-space generators S, P, K, theta, pi_theta, N1, B1,
N2, B2, the root R, the imaginary unit i and the parameters d, c, l, eps.
Rational literals are written a/b.  The printer emits the same grammar, so
``parse_expr(to_text(e)) == e``.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .algebra import (
    PARAMETERS,
    PHASE_GENERATORS,
    ExpressionError,
    ScalarExpr,
    _GEN_INDEX,
)

IDENTIFIERS = frozenset(PARAMETERS + PHASE_GENERATORS + ("R", "i"))

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\S))")


class ParseError(ExpressionError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            break
        start = m.start(m.lastindex)
        if m.group(1):
            tokens.append(("num", int(m.group(1)), start))
        elif m.group(2):
            tokens.append(("id", m.group(2), start))
        else:
            if m.group(3) not in "+-*/^()":
                raise ParseError(f"unexpected character {m.group(3)!r}", start)
            tokens.append(("op", m.group(3), start))
        pos = m.end()
    tokens.append(("end", None, len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.k = 0

    def peek(self):
        return self.tokens[self.k]

    def take(self):
        tok = self.tokens[self.k]
        self.k += 1
        return tok

    def expect_op(self, op):
        kind, value, pos = self.take()
        if kind != "op" or value != op:
            raise ParseError(f"expected {op!r}", pos)

    def parse(self) -> ScalarExpr:
        e = self.expr()
        kind, _, pos = self.peek()
        if kind != "end":
            raise ParseError("unexpected trailing input", pos)
        return e

    def expr(self):
        e = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            rhs = self.term()
            e = e + rhs if op == "+" else e - rhs
        return e

    def term(self):
        e = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op, pos = self.take()[1:]
            rhs = self.unary()
            if op == "*":
                e = e * rhs
            else:
                if rhs.is_zero():
                    raise ExpressionError(f"division by zero at position {pos}")
                e = e / rhs
        return e

    def unary(self):
        if self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            e = self.unary()
            return -e if op == "-" else e
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            sign = 1
            if self.peek()[0] == "op" and self.peek()[1] == "-":
                self.take()
                sign = -1
            kind, value, pos = self.take()
            if kind != "num":
                raise ParseError("exponent must be an integer literal", pos)
            if sign < 0 and base.is_zero():
                raise ExpressionError(f"division by zero at position {pos}")
            return base ** (sign * value)
        return base

    def atom(self):
        kind, value, pos = self.take()
        if kind == "num":
            return ScalarExpr.const(value)
        if kind == "id":
            if value not in IDENTIFIERS:
                raise ParseError(f"unknown identifier {value!r}", pos)
            return ScalarExpr.gen(value)
        if kind == "op" and value == "(":
            e = self.expr()
            self.expect_op(")")
            return e
        raise ParseError("expected a number, identifier or '('", pos)


def parse_expr(text: str) -> ScalarExpr:
    """Parse ``text`` into a normalized :class:`ScalarExpr`."""
    return _Parser(text).parse()


# ---- printing ----

_NAMES = list(_GEN_INDEX)


def _rational_text(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def _poly_text(poly) -> str:
    terms = []
    for monom, coeff in poly.terms():
        q = Fraction(int(coeff.numerator), int(coeff.denominator))
        factors = []
        for name, e in zip(_NAMES, monom):
            if e == 1:
                factors.append(name)
            elif e > 1:
                factors.append(f"{name}^{e}")
        mag = abs(q)
        if not factors:
            body = _rational_text(mag)
        elif mag == 1:
            body = "*".join(factors)
        else:
            body = _rational_text(mag) + "*" + "*".join(factors)
        terms.append(("-" if q < 0 else "+", body))
    if not terms:
        return "0"
    out = ("-" if terms[0][0] == "-" else "") + terms[0][1]
    for sign, body in terms[1:]:
        out += f" {sign} {body}"
    return out


def _frac_text(value) -> str:
    num = _poly_text(value.numer)
    if value.denom == 1:
        return num
    return f"({num})/({_poly_text(value.denom)})"


def to_text(e: ScalarExpr) -> str:
    """Render in the parser's grammar."""
    parts = e.parts
    if not parts:
        return "0"
    pieces = []
    for (r, j) in sorted(parts):
        text = _frac_text(parts[(r, j)])
        suffix = ("*R" if r else "") + ("*i" if j else "")
        if suffix:
            if text == "1":
                text = suffix[1:]
            else:
                text = f"({text}){suffix}"
        elif len(parts) > 1:
            text = f"({text})"
        pieces.append(text)
    return " + ".join(pieces)
