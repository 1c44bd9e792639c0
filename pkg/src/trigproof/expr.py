"""Normalized-form trigonometric expressions.

An expression is a sum of terms, each a coefficient in Q[sqrt2, sqrt3] times a
product of ``sin``/``cos`` factors of integer multiples of ``x`` plus a phase.
Phases are stored as integer multiples of pi/12, which is the closure of the
generator alphabet under every rewrite rule.

All values are immutable tuples so they hash cheaply; the search code keeps
hundreds of thousands of them in visited sets.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence

SIN = 0
COS = 1
KIND_NAMES = ("sin", "cos")

# One full turn, in units of pi/12.
TURN = 24
HALF_TURN = 12

_SQRT2 = math.sqrt(2.0)
_SQRT3 = math.sqrt(3.0)
_SQRT6 = math.sqrt(6.0)


class UnfoldableConstant(ValueError):
    """A constant trig value that does not lie in Q[sqrt2, sqrt3]."""


class SurdScalar(NamedTuple):
    """``(a + b*sqrt2 + c*sqrt3 + d*sqrt6) / den`` with integer parts.

    The tuple is kept reduced (``gcd(a, b, c, d, den) == 1``, ``den > 0``) so
    equality and hashing are structural.
    """

    a: int
    b: int
    c: int
    d: int
    den: int

    @staticmethod
    def make(a: int, b: int = 0, c: int = 0, d: int = 0, den: int = 1) -> "SurdScalar":
        if den == 0:
            raise ZeroDivisionError("SurdScalar denominator is zero")
        if not (a or b or c or d):
            return ZERO
        if den < 0:
            a, b, c, d, den = -a, -b, -c, -d, -den
        g = math.gcd(a, b, c, d, den)
        if g != 1:
            a, b, c, d, den = a // g, b // g, c // g, d // g, den // g
        return tuple.__new__(SurdScalar, (a, b, c, d, den))

    @classmethod
    def from_parts(cls, c1=0, c2=0, c3=0, c6=0) -> "SurdScalar":
        """Build from rational coefficients of 1, sqrt2, sqrt3, sqrt6."""
        parts = [Fraction(v) for v in (c1, c2, c3, c6)]
        den = math.lcm(*(p.denominator for p in parts))
        return cls.make(*(int(p * den) for p in parts), den)

    @classmethod
    def rational(cls, value) -> "SurdScalar":
        value = Fraction(value)
        return cls.make(value.numerator, 0, 0, 0, value.denominator)

    # Rational components, matching the field basis 1, sqrt2, sqrt3, sqrt6.
    @property
    def c1(self) -> Fraction:
        return Fraction(self.a, self.den)

    @property
    def c2(self) -> Fraction:
        return Fraction(self.b, self.den)

    @property
    def c3(self) -> Fraction:
        return Fraction(self.c, self.den)

    @property
    def c6(self) -> Fraction:
        return Fraction(self.d, self.den)

    def is_zero(self) -> bool:
        return not (self.a or self.b or self.c or self.d)

    def is_rational(self) -> bool:
        return not (self.b or self.c or self.d)

    def __bool__(self) -> bool:
        return not self.is_zero()

    def __add__(self, other: "SurdScalar") -> "SurdScalar":
        a1, b1, c1, d1, n1 = self
        a2, b2, c2, d2, n2 = other
        if n1 == n2:
            return SurdScalar.make(a1 + a2, b1 + b2, c1 + c2, d1 + d2, n1)
        return SurdScalar.make(
            a1 * n2 + a2 * n1, b1 * n2 + b2 * n1, c1 * n2 + c2 * n1, d1 * n2 + d2 * n1, n1 * n2
        )

    def __neg__(self) -> "SurdScalar":
        a, b, c, d, n = self
        return tuple.__new__(SurdScalar, (-a, -b, -c, -d, n))

    def __sub__(self, other: "SurdScalar") -> "SurdScalar":
        return self + (-other)

    def __mul__(self, other) -> "SurdScalar":
        if not isinstance(other, SurdScalar):
            if isinstance(other, (int, Fraction)):
                other = SurdScalar.rational(other)
            else:
                return NotImplemented
        a1, b1, c1, d1, n1 = self
        a2, b2, c2, d2, n2 = other
        return SurdScalar.make(
            a1 * a2 + 2 * b1 * b2 + 3 * c1 * c2 + 6 * d1 * d2,
            a1 * b2 + b1 * a2 + 3 * (c1 * d2 + d1 * c2),
            a1 * c2 + c1 * a2 + 2 * (b1 * d2 + d1 * b2),
            a1 * d2 + d1 * a2 + b1 * c2 + c1 * b2,
            n1 * n2,
        )

    __rmul__ = __mul__

    def half(self) -> "SurdScalar":
        return SurdScalar.make(self.a, self.b, self.c, self.d, 2 * self.den)

    def __float__(self) -> float:
        return (self.a + self.b * _SQRT2 + self.c * _SQRT3 + self.d * _SQRT6) / self.den

    def __repr__(self) -> str:
        return f"SurdScalar({self.c1}, {self.c2}, {self.c3}, {self.c6})"


ZERO = tuple.__new__(SurdScalar, (0, 0, 0, 0, 1))
ONE = tuple.__new__(SurdScalar, (1, 0, 0, 0, 1))

# sin(k*pi/12) for k = 0..6; the rest of the circle follows by symmetry.
_SIN_FIRST_QUADRANT = (
    ZERO,
    SurdScalar.make(0, -1, 0, 1, 4),  # (sqrt6 - sqrt2)/4
    SurdScalar.make(1, 0, 0, 0, 2),
    SurdScalar.make(0, 1, 0, 0, 2),
    SurdScalar.make(0, 0, 1, 0, 2),
    SurdScalar.make(0, 1, 0, 1, 4),  # (sqrt6 + sqrt2)/4
    ONE,
)


def _sin12(k: int) -> SurdScalar:
    k %= TURN
    if k > HALF_TURN:
        return -_sin12(k - HALF_TURN)
    if k > 6:
        k = HALF_TURN - k
    return _SIN_FIRST_QUADRANT[k]


_SIN_TABLE = tuple(_sin12(k) for k in range(TURN))
_COS_TABLE = tuple(_sin12(k + 6) for k in range(TURN))


def fold12(kind: int, phase12: int) -> SurdScalar:
    """Exact value of sin/cos at ``phase12 * pi/12``."""
    table = _SIN_TABLE if kind == SIN else _COS_TABLE
    return table[phase12 % TURN]


def to_twelfths(phase) -> int:
    """Convert a phase given as a rational multiple of pi to units of pi/12."""
    p = Fraction(phase) * 12
    if p.denominator != 1:
        raise UnfoldableConstant(f"phase {Fraction(phase)}*pi is not a multiple of pi/12")
    return int(p)


def fold_constant(kind: int | str, phase) -> SurdScalar:
    """Exact value of ``sin``/``cos`` at ``phase*pi`` (``phase`` rational)."""
    if isinstance(kind, str):
        kind = KIND_NAMES.index(kind)
    return fold12(kind, to_twelfths(phase))


def reduce_phase12(p: int) -> int:
    """Reduce a phase to the canonical window (-12, 12], i.e. (-pi, pi]."""
    return (p + 11) % TURN - 11


class Angle(NamedTuple):
    x_coef: int
    phase: Fraction  # multiple of pi


class Factor(NamedTuple):
    """``kind(x_coef*x + phase12*pi/12) ** exponent``.

    Tuple order is the canonical factor order: sin before cos, then x
    coefficient, then phase, then exponent.
    """

    kind: int
    x_coef: int
    phase12: int
    exponent: int = 1

    @property
    def angle(self) -> Angle:
        return Angle(self.x_coef, Fraction(self.phase12, 12))

    @property
    def phase(self) -> Fraction:
        return Fraction(self.phase12, 12)

    @property
    def kind_name(self) -> str:
        return KIND_NAMES[self.kind]

    @property
    def base(self) -> tuple[int, int, int]:
        return (self.kind, self.x_coef, self.phase12)


class Term(NamedTuple):
    coef: SurdScalar
    factors: tuple[Factor, ...]

    @property
    def degree(self) -> int:
        return sum(f.exponent for f in self.factors)

    def sort_key(self):
        return (-self.degree, self.factors)

    def scaled(self, s: SurdScalar) -> "Term":
        return Term(self.coef * s, self.factors)


def make_term(coef: SurdScalar, raw: Iterable[tuple[int, int, int, int]]) -> Term | None:
    """Canonicalize a coefficient times raw ``(kind, x_coef, phase12, exp)`` factors.

    Constant factors fold into the coefficient, negative arguments flip by
    parity, repeated bases merge into exponents. Returns None for a zero term.
    """
    exps: dict[tuple[int, int, int], int] = {}
    for kind, xc, p, e in raw:
        if e <= 0:
            continue
        if xc == 0:
            coef = coef * _pow(fold12(kind, p), e)
            continue
        if xc < 0:
            xc, p = -xc, -p
            if kind == SIN and e % 2:
                coef = -coef
        key = (kind, xc, reduce_phase12(p))
        exps[key] = exps.get(key, 0) + e
    if coef.is_zero():
        return None
    factors = tuple(Factor(k, xc, p, e) for (k, xc, p), e in sorted(exps.items()))
    return Term(coef, factors)


def _pow(s: SurdScalar, e: int) -> SurdScalar:
    out = ONE
    for _ in range(e):
        out = out * s
    return out


@dataclass(frozen=True)
class Expression:
    """An explicitly ordered sum of terms. The empty sum is zero."""

    terms: tuple[Term, ...] = ()

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def max_degree(self) -> int:
        return max((t.degree for t in self.terms), default=0)

    def __str__(self) -> str:
        from .syntax import to_text

        return to_text(self)

    def __repr__(self) -> str:
        return f"Expression({str(self)!r})"


ZERO_EXPR = Expression(())


def combine(terms: Iterable[Term], sort: bool = True) -> Expression:
    """Merge like terms and drop zeros.

    With ``sort=False`` a merged term keeps the position of its first
    occurrence, which is how the parser preserves written order.
    """
    acc: dict[tuple[Factor, ...], SurdScalar] = {}
    for t in terms:
        prev = acc.get(t.factors)
        acc[t.factors] = t.coef if prev is None else prev + t.coef
    out = [Term(c, f) for f, c in acc.items() if not c.is_zero()]
    if sort:
        out.sort(key=Term.sort_key)
    return Expression(tuple(out))


def canonicalize(e: Expression) -> Expression:
    """Full normalization: refold every term, merge, and sort to default order."""
    terms = []
    for t in e.terms:
        nt = make_term(t.coef, t.factors)
        if nt is not None:
            terms.append(nt)
    return combine(terms, sort=True)


def is_canonical(e: Expression) -> bool:
    return canonicalize(e) == e


def same_up_to_order(a: Expression, b: Expression) -> bool:
    return canonicalize(a) == canonicalize(b)


def negate(e: Expression) -> Expression:
    return Expression(tuple(Term(-t.coef, t.factors) for t in e.terms))


def add(a: Expression, b: Expression) -> Expression:
    return combine(a.terms + b.terms)


def subtract(a: Expression, b: Expression) -> Expression:
    return add(a, negate(b))


def term_value(t: Term, x: float) -> float:
    v = float(t.coef)
    for f in t.factors:
        arg = f.x_coef * x + f.phase12 * math.pi / 12
        v *= (math.sin(arg) if f.kind == SIN else math.cos(arg)) ** f.exponent
    return v


def eval_numeric(e: Expression, x: float) -> float:
    return math.fsum(term_value(t, x) for t in e.terms)


def magnitude(e: Expression) -> float:
    """Sum of absolute coefficients; an upper bound on |e(x)| for any x."""
    return sum(abs(float(t.coef)) for t in e.terms)


def remove_common_factors(e: Expression) -> Expression:
    """Divide out the largest factor multiset shared by every term."""
    if not e.terms:
        return e
    common: dict[tuple[int, int, int], int] = {f.base: f.exponent for f in e.terms[0].factors}
    for t in e.terms[1:]:
        here = {f.base: f.exponent for f in t.factors}
        common = {b: min(x, here[b]) for b, x in common.items() if b in here}
    if not common:
        return e
    out = []
    for t in e.terms:
        kept = []
        for f in t.factors:
            left = f.exponent - common.get(f.base, 0)
            if left:
                kept.append(f._replace(exponent=left))
        out.append(Term(t.coef, tuple(kept)))
    return Expression(tuple(out))


def shuffle_terms(e: Expression, rng) -> tuple[Expression, list[int]]:
    """Permute terms. Returns ``(shuffled, perm)`` with ``perm[old] = new``."""
    n = len(e.terms)
    order = list(range(n))
    rng.shuffle(order)  # order[new] = old
    perm = [0] * n
    for new, old in enumerate(order):
        perm[old] = new
    return Expression(tuple(e.terms[old] for old in order)), perm


def build(terms: Sequence[tuple]) -> Expression:
    """Convenience constructor for tests: ``[(coef, [(kind, xc, phase, exp), ...]), ...]``.

    ``coef`` may be an int/Fraction/SurdScalar; ``phase`` is a rational multiple of pi.
    """
    out = []
    for coef, factors in terms:
        if not isinstance(coef, SurdScalar):
            coef = SurdScalar.rational(coef)
        raw = []
        for f in factors:
            kind, xc, phase, *rest = f
            if isinstance(kind, str):
                kind = KIND_NAMES.index(kind)
            raw.append((kind, xc, to_twelfths(phase), rest[0] if rest else 1))
        t = make_term(coef, raw)
        if t is not None:
            out.append(t)
    return combine(out, sort=False)


def substitute_linear(e: Expression, a: int, b) -> Expression:
    """Replace ``x`` by ``a*x + b`` (``b`` a rational multiple of pi), renormalized.

    Raises UnfoldableConstant if some shifted phase leaves the pi/12 grid.
    """
    if a == 0:
        raise ValueError("a must be nonzero")
    b = Fraction(b)
    terms = []
    for t in e.terms:
        raw = []
        for f in t.factors:
            shift = to_twelfths(f.x_coef * b)
            raw.append((f.kind, f.x_coef * a, f.phase12 + shift, f.exponent))
        nt = make_term(t.coef, raw)
        if nt is not None:
            terms.append(nt)
    return combine(terms)
