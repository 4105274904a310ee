"""Text grammars for polynomials and points.

Polynomials: ``z^3 - 3*z + 1/2``, ``(1/3)*z^3 + (-1)*z``, a coefficient list
``1,0,-3,1/2`` (leading coefficient first), or the ``d; a_d, ..., a_0`` form.
Points: a rational, or ``x+y*sqrt(D)`` with any of the parts omitted.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .numerics import QuadExt
from .polyforms import PolySpec


class ParseError(ValueError):
    def __init__(self, message: str, text: str, position: int):
        self.text = text
        self.position = position
        super().__init__(f"{message} at position {position}")

    def pretty(self) -> str:
        return f"{self.args[0]}\n  {self.text}\n  {' ' * self.position}^"


_TOKEN = re.compile(r"\s*(?:(\d+)|(\*\*|[-+*/^()])|(sqrt)|([zx]))")


def _tokens(text: str) -> list:
    out = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            start = len(text) - len(text[pos:].lstrip())
            raise ParseError(f"unexpected character {text[start]!r}", text, start)
        start = m.start(m.lastindex)
        if m.group(1):
            out.append(("num", int(m.group(1)), start))
        elif m.group(2):
            out.append(("op", "^" if m.group(2) == "**" else m.group(2), start))
        elif m.group(3):
            out.append(("sqrt", None, start))
        else:
            out.append(("var", None, start))
        pos = m.end()
    out.append(("end", None, len(text)))
    return out


_NAMES = {"var": "z", "num": "a number", "sqrt": "sqrt"}


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokens(text)
        self.i = 0

    def peek(self, kind=None, value=None) -> bool:
        k, v, _ = self.toks[self.i]
        return (kind is None or k == kind) and (value is None or v == value)

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def fail(self, message: str):
        raise ParseError(message, self.text, self.toks[self.i][2])

    def expect(self, kind, value=None):
        if not self.peek(kind, value):
            self.fail(f"expected {value or _NAMES.get(kind, kind)}")
        return self.take()

    def rational(self) -> Fraction:
        """INT ['/' INT] or '(' ['+'|'-'] rational ')'."""
        if self.peek("op", "("):
            self.take()
            sign = self.sign()
            q = self.rational()
            self.expect("op", ")")
            return sign * q
        num = self.expect("num")[1]
        if self.peek("op", "/"):
            self.take()
            den_tok = self.expect("num")
            if den_tok[1] == 0:
                raise ParseError("division by zero", self.text, den_tok[2])
            return Fraction(num, den_tok[1])
        return Fraction(num)

    def sign(self) -> int:
        s = 1
        while self.peek("op", "+") or self.peek("op", "-"):
            if self.take()[1] == "-":
                s = -s
        return s

    def at_end(self):
        if not self.peek("end"):
            self.fail("unexpected trailing input")


# -- polynomials ---------------------------------------------------------------


def _poly_term(p: _Parser) -> tuple[Fraction, int]:
    coef = Fraction(1)
    if p.peek("num") or p.peek("op", "("):
        coef = p.rational()
        if p.peek("op", "*"):
            p.take()
            if not p.peek("var"):
                p.fail("expected z after '*'")
        if not p.peek("var"):
            return coef, 0
    p.expect("var")
    power = 1
    if p.peek("op", "^"):
        p.take()
        power = p.expect("num")[1]
    return coef, power


def _parse_expression(text: str) -> PolySpec:
    p = _Parser(text)
    terms: dict = {}
    sign = p.sign()
    while True:
        coef, power = _poly_term(p)
        terms[power] = terms.get(power, Fraction(0)) + sign * coef
        if p.peek("end"):
            break
        if not (p.peek("op", "+") or p.peek("op", "-")):
            p.fail("expected '+' or '-'")
        sign = p.sign()
    d = max((k for k, v in terms.items() if v != 0), default=0)
    if d == 0:
        raise ParseError("polynomial must be nonconstant", text, 0)
    return PolySpec(tuple(terms.get(k, Fraction(0)) for k in range(d, -1, -1)))


def _parse_list(text: str, offset: int = 0) -> list[Fraction]:
    coeffs = []
    pos = offset
    for part in text[offset:].split(","):
        p = _Parser(part)
        try:
            q = p.sign() * p.rational()
            p.at_end()
        except ParseError as exc:
            raise ParseError(exc.args[0].rsplit(" at position", 1)[0], text, pos + exc.position) from None
        coeffs.append(q)
        pos += len(part) + 1
    return coeffs


def parse_polynomial(text: str) -> PolySpec:
    text = text.strip()
    if not text:
        raise ParseError("empty polynomial", text, 0)
    if ";" in text:
        head, _, _ = text.partition(";")
        try:
            d = int(head)
        except ValueError:
            raise ParseError("expected degree before ';'", text, 0) from None
        coeffs = _parse_list(text, len(head) + 1)
        if len(coeffs) != d + 1:
            raise ParseError(f"degree {d} needs {d + 1} coefficients", text, len(head) + 1)
    elif "," in text or ("z" not in text and "x" not in text):
        coeffs = _parse_list(text)
    else:
        return _parse_expression(text)
    if len(coeffs) < 2:
        raise ParseError("polynomial must be nonconstant", text, 0)
    if coeffs[0] == 0:
        raise ParseError("leading coefficient must be nonzero", text, 0)
    return PolySpec(tuple(coeffs))


# -- points ---------------------------------------------------------------------


def _point_term(p: _Parser):
    """rational | [rational ['*']] sqrt '(' [sign] rational ')' ['/' INT]; returns (value, D or None)."""
    coef = Fraction(1)
    if not p.peek("sqrt"):
        coef = p.rational()
        if p.peek("op", "*"):
            p.take()
            if not p.peek("sqrt"):
                p.fail("expected sqrt after '*'")
        if not p.peek("sqrt"):
            return coef, None
    p.take()
    p.expect("op", "(")
    D = p.sign() * p.rational()
    p.expect("op", ")")
    if p.peek("op", "/"):
        p.take()
        den = p.expect("num")
        if den[1] == 0:
            raise ParseError("division by zero", p.text, den[2])
        coef /= den[1]
    return coef, D


def parse_point(text: str):
    """A Fraction, or a QuadExt for points involving sqrt(D)."""
    p = _Parser(text.strip())
    if p.peek("end"):
        raise ParseError("empty point", text, 0)
    x = Fraction(0)
    y = Fraction(0)
    D = None
    sign = p.sign()
    while True:
        start = p.toks[p.i][2]
        value, rad = _point_term(p)
        if rad is None:
            x += sign * value
        else:
            if D is not None and rad != D:
                raise ParseError("only one square root is allowed", p.text, start)
            D = rad
            y += sign * value
        if p.peek("end"):
            break
        if not (p.peek("op", "+") or p.peek("op", "-")):
            p.fail("expected '+' or '-'")
        sign = p.sign()
    if D is None:
        return x
    z = QuadExt.sqrt_of(D, y) + x
    return z.x if z.y == 0 else z
