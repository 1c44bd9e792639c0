"""Text form of expressions: a recursive-descent parser and a deterministic printer.

Printed form, e.g.::

    sqrt(3)*sin(x)/2 - cos(5*x + pi/3)/2 + sin(x + pi/6)**2*cos(2*x)

Coefficients with several surd components print as a parenthesized sum,
``-(sqrt(2) + sqrt(6))*sin(x)/4``. The parser accepts this and a little more
(arbitrary nesting of ``+ - * / **`` and parentheses), but never expands sums
inside a trig argument: ``sin(x + pi/3)`` stays one factor.
"""
from __future__ import annotations

import re
from fractions import Fraction

from .expr import (
    COS,
    KIND_NAMES,
    ONE,
    SIN,
    Expression,
    Factor,
    SurdScalar,
    Term,
    UnfoldableConstant,
    combine,
    make_term,
    to_twelfths,
)


class ParseError(SyntaxError):
    def __init__(self, msg: str, text: str = "", pos: int = 0):
        super().__init__(f"{msg} at position {pos}")
        self.text = text
        self.pos = pos


# ---------------------------------------------------------------- printing


def phase_text(p12: int) -> str:
    """Magnitude of a phase, e.g. ``pi/3`` or ``2*pi/3``."""
    q = Fraction(abs(p12), 12)
    n, d = q.numerator, q.denominator
    if n == 1:
        return "pi" if d == 1 else f"pi/{d}"
    return f"{n}*pi" if d == 1 else f"{n}*pi/{d}"


def factor_text(f: Factor) -> str:
    arg = "x" if f.x_coef == 1 else f"{f.x_coef}*x"
    if f.phase12:
        arg += (" + " if f.phase12 > 0 else " - ") + phase_text(f.phase12)
    out = f"{KIND_NAMES[f.kind]}({arg})"
    if f.exponent > 1:
        out += f"**{f.exponent}"
    return out


_SURDS = ("", "sqrt(2)", "sqrt(3)", "sqrt(6)")


def _surd_item(n: int, k: int) -> str:
    if k == 0:
        return str(n)
    return _SURDS[k] if n == 1 else f"{n}*{_SURDS[k]}"


def term_text(t: Term) -> tuple[bool, str]:
    """Return ``(negative, body)``; the sign is rendered by the caller."""
    nums = (t.coef.a, t.coef.b, t.coef.c, t.coef.d)
    nonzero = [(k, n) for k, n in enumerate(nums) if n]
    parts: list[str] = []
    if len(nonzero) == 1:
        k, n = nonzero[0]
        negative = n < 0
        m = abs(n)
        if k == 0:
            if m != 1:
                parts.append(str(m))
        else:
            if m != 1:
                parts.append(str(m))
            parts.append(_SURDS[k])
    else:
        negative = nonzero[0][1] < 0
        sgn = -1 if negative else 1
        inner = ""
        for idx, (k, n) in enumerate(nonzero):
            n *= sgn
            item = _surd_item(abs(n), k)
            if idx == 0:
                inner = item
            else:
                inner += (" - " if n < 0 else " + ") + item
        parts.append(f"({inner})")
    parts.extend(factor_text(f) for f in t.factors)
    body = "*".join(parts) or "1"
    if t.coef.den != 1:
        body += f"/{t.coef.den}"
    return negative, body


def to_text(e: Expression, pad_to: int | None = None) -> str:
    """Print ``e`` in its explicit term order, optionally padded with ``+ 0``."""
    pieces = []
    for idx, t in enumerate(e.terms):
        neg, body = term_text(t)
        if idx == 0:
            pieces.append("-" + body if neg else body)
        else:
            pieces.append((" - " if neg else " + ") + body)
    n = len(e.terms)
    if pad_to is not None:
        if pad_to < n:
            raise ValueError(f"pad_to={pad_to} is smaller than the term count {n}")
        for idx in range(n, pad_to):
            pieces.append("0" if idx == 0 else " + 0")
    return "".join(pieces) or "0"


def slots_text(slots) -> str:
    """Print a sequence of terms and ``None`` placeholders (printed ``0``)."""
    pieces = []
    for idx, t in enumerate(slots):
        if t is None:
            pieces.append("0" if idx == 0 else " + 0")
            continue
        neg, body = term_text(t)
        if idx == 0:
            pieces.append("-" + body if neg else body)
        else:
            pieces.append((" - " if neg else " + ") + body)
    return "".join(pieces) or "0"


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(r"\s*(?:(\d+)|(\*\*|[-+*/()])|(sin|cos|sqrt|pi|x|π))")


def _tokenize(text: str):
    pos = 0
    out = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            bad = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ParseError(f"unexpected character {text[bad]!r}", text, bad)
        start = m.start(m.lastindex)
        if m.group(1) is not None:
            out.append(("int", int(m.group(1)), start))
        elif m.group(2) is not None:
            out.append((m.group(2), None, start))
        else:
            name = m.group(3)
            out.append(("pi" if name == "π" else name, None, start))
        pos = m.end()
    out.append(("end", None, len(text)))
    return out


# A polynomial value during parsing: list of (coef, raw factors).
_Poly = list


def _const(s: SurdScalar) -> _Poly:
    return [(s, ())]


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i][0]

    def take(self, kind=None):
        tok = self.toks[self.i]
        if kind is not None and tok[0] != kind:
            self.fail(f"expected {kind!r}, found {tok[0]!r}")
        self.i += 1
        return tok

    def fail(self, msg):
        raise ParseError(msg, self.text, self.toks[self.i][2])

    # expr := ["+"|"-"] product (("+"|"-") product)*
    def expr(self) -> list[_Poly]:
        """Top-level summands, kept separate so written term order survives."""
        summands = []
        sign = 1
        if self.peek() in ("+", "-"):
            sign = -1 if self.take()[0] == "-" else 1
        summands.append(self._signed(self.product(), sign))
        while self.peek() in ("+", "-"):
            sign = -1 if self.take()[0] == "-" else 1
            summands.append(self._signed(self.product(), sign))
        return summands

    @staticmethod
    def _signed(p: _Poly, sign: int) -> _Poly:
        if sign > 0:
            return p
        return [(-c, f) for c, f in p]

    def product(self) -> _Poly:
        val = self.power()
        while self.peek() in ("*", "/"):
            op = self.take()[0]
            pos = self.toks[self.i][2]
            rhs = self.power()
            if op == "*":
                val = [(c1 * c2, f1 + f2) for c1, f1 in val for c2, f2 in rhs]
            else:
                if len(rhs) != 1 or rhs[0][1] or not rhs[0][0].is_rational() or rhs[0][0].is_zero():
                    raise ParseError("can only divide by a nonzero rational constant", self.text, pos)
                r = rhs[0][0]
                inv = SurdScalar.make(r.den, 0, 0, 0, r.a)
                val = [(c * inv, f) for c, f in val]
        return val

    def power(self) -> _Poly:
        base = self.atom()
        if self.peek() == "**":
            self.take()
            tok = self.take("int")
            n = tok[1]
            if n < 1:
                raise ParseError("exponent must be a positive integer", self.text, tok[2])
            out = base
            for _ in range(n - 1):
                out = [(c1 * c2, f1 + f2) for c1, f1 in out for c2, f2 in base]
            return out
        return base

    def atom(self) -> _Poly:
        kind, val, pos = self.toks[self.i]
        if kind == "int":
            self.take()
            return _const(SurdScalar.rational(val))
        if kind == "-":
            self.take()
            return self._signed(self.power(), -1)
        if kind == "(":
            self.take()
            summands = self.expr()
            self.take(")")
            return [t for s in summands for t in s]
        if kind == "sqrt":
            self.take()
            self.take("(")
            tok = self.take("int")
            self.take(")")
            radicand = {1: ONE, 2: SurdScalar.make(0, 1), 3: SurdScalar.make(0, 0, 1),
                        4: SurdScalar.rational(2), 6: SurdScalar.make(0, 0, 0, 1)}
            if tok[1] == 0:
                return _const(SurdScalar.rational(0))
            if tok[1] not in radicand:
                raise ParseError(f"sqrt({tok[1]}) is outside Q[sqrt2, sqrt3]", self.text, tok[2])
            return _const(radicand[tok[1]])
        if kind in ("sin", "cos"):
            self.take()
            self.take("(")
            apos = self.toks[self.i][2]
            xc, pc, c = self.linear()
            self.take(")")
            if c != 0:
                raise ParseError("trig argument must be a*x + b*pi", self.text, apos)
            if xc.denominator != 1:
                raise ParseError("x coefficient must be an integer", self.text, apos)
            try:
                p12 = to_twelfths(pc)
            except UnfoldableConstant as exc:
                raise UnfoldableConstant(f"{exc} (position {apos})") from None
            k = SIN if kind == "sin" else COS
            return [(ONE, ((k, int(xc), p12, 1),))]
        if kind in ("x", "pi"):
            self.fail(f"bare {kind!r} outside a trig argument")
        self.fail(f"unexpected {kind!r}")

    # Linear forms inside trig arguments: (x coefficient, pi coefficient, constant).
    def linear(self):
        sign = 1
        if self.peek() in ("+", "-"):
            sign = -1 if self.take()[0] == "-" else 1
        acc = self._lscale(self.lterm(), sign)
        while self.peek() in ("+", "-"):
            sign = -1 if self.take()[0] == "-" else 1
            t = self._lscale(self.lterm(), sign)
            acc = tuple(u + v for u, v in zip(acc, t))
        return acc

    @staticmethod
    def _lscale(v, s):
        return tuple(s * u for u in v)

    def lterm(self):
        val = self.lfactor()
        while self.peek() in ("*", "/"):
            op = self.take()[0]
            pos = self.toks[self.i][2]
            rhs = self.lfactor()
            if op == "*":
                if val[0] == 0 and val[1] == 0:
                    val = self._lscale(rhs, val[2])
                elif rhs[0] == 0 and rhs[1] == 0:
                    val = self._lscale(val, rhs[2])
                else:
                    raise ParseError("nonlinear trig argument", self.text, pos)
            else:
                if rhs[0] != 0 or rhs[1] != 0 or rhs[2] == 0:
                    raise ParseError("can only divide by a nonzero number", self.text, pos)
                val = self._lscale(val, 1 / rhs[2])
        return val

    def lfactor(self):
        kind, val, pos = self.toks[self.i]
        zero = Fraction(0)
        if kind == "int":
            self.take()
            return (zero, zero, Fraction(val))
        if kind == "x":
            self.take()
            return (Fraction(1), zero, zero)
        if kind == "pi":
            self.take()
            return (zero, Fraction(1), zero)
        if kind == "-":
            self.take()
            return self._lscale(self.lfactor(), -1)
        if kind == "(":
            self.take()
            v = self.linear()
            self.take(")")
            return v
        self.fail(f"unexpected {kind!r} in trig argument")


def _to_terms(poly: _Poly) -> list[Term]:
    """Normal terms of one summand, with like monomials merged."""
    out = []
    for coef, raw in poly:
        t = make_term(coef, raw)
        if t is not None:
            out.append(t)
    return list(combine(out, sort=False).terms)


def _parse_summands(text: str) -> list[_Poly]:
    p = _Parser(text)
    summands = p.expr()
    if p.peek() != "end":
        p.fail(f"unexpected {p.peek()!r}")
    return summands


def parse(text: str) -> Expression:
    """Parse text into an Expression, merging like terms but keeping written order."""
    terms = [t for s in _parse_summands(text) for t in _to_terms(s)]
    return combine(terms, sort=False)


def parse_slots(text: str) -> tuple[Expression, list[int | None]]:
    """Parse a padded state where literal ``0`` summands occupy term slots.

    Returns the expression and ``slot_map[slot] -> term index`` (None for a
    zero slot). Each top-level summand must be a single nonzero term or 0.
    """
    summands = _parse_summands(text)
    terms: list[Term] = []
    slot_map: list[int | None] = []
    for s in summands:
        ts = _to_terms(s)
        if not ts:
            slot_map.append(None)
            continue
        if len(ts) != 1:
            raise ParseError("padded state slots must each hold one term", text, 0)
        slot_map.append(len(terms))
        terms.append(ts[0])
    e = combine(terms, sort=False)
    if len(e.terms) != len(terms):
        raise ParseError("padded state contains like terms", text, 0)
    return e, slot_map
