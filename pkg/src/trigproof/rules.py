"""The eight rewrite rules, the (i, j, k) action space and its 1..112 labels.

An action names term ``i`` and factor slots ``j >= k`` of that term. ``k == -1``
applies an angle-addition rule to factor ``j``; otherwise a product-to-sum rule
is applied to factors ``j`` and ``k`` (``j == k`` means a squared factor).

Product-to-sum, reading the pair left to right (alpha = slot k, beta = slot j)::

    Pcc  cos a cos b = cos(a - b)/2 + cos(a + b)/2
    Pcs  cos a sin b = sin(a + b)/2 - sin(a - b)/2
    Psc  sin a cos b = sin(a + b)/2 + sin(a - b)/2
    Pss  sin a sin b = cos(a - b)/2 - cos(a + b)/2

Angle addition splits ``A*x + B`` into ``A*x`` and the constant ``B``::

    Ac+  cos(a + b) = cos a cos b - sin a sin b
    As+  sin(a + b) = sin a cos b + cos a sin b

A negative ``B`` covers the minus variants.
"""
from __future__ import annotations

import enum
from functools import lru_cache
from typing import NamedTuple

from .expr import (
    COS,
    SIN,
    Expression,
    Factor,
    SurdScalar,
    Term,
    canonicalize,
    make_term,
)

MAX_TERMS = 8
MAX_SLOTS = 4
N_PAIRS = 14
N_LABELS = MAX_TERMS * N_PAIRS  # 112

PAIRS = (
    (0, -1), (1, -1), (2, -1), (3, -1),
    (0, 0), (1, 0), (2, 0), (3, 0),
    (1, 1), (2, 1), (3, 1),
    (2, 2), (3, 2),
    (3, 3),
)
PAIR_INDEX = {p: n for n, p in enumerate(PAIRS)}


class OutOfRange(ValueError):
    pass


class InvalidAction(ValueError):
    pass


class RuleKind(str, enum.Enum):
    Pcc = "Pcc"
    Pcs = "Pcs"
    Psc = "Psc"
    Pss = "Pss"
    AcPlus = "Ac+"
    AcMinus = "Ac-"
    AsPlus = "As+"
    AsMinus = "As-"


class Action(NamedTuple):
    i: int
    j: int
    k: int

    def __str__(self) -> str:
        return f"({self.i},{self.j},{self.k})"


def encode(a: Action) -> int:
    i, j, k = a
    if not 0 <= i < MAX_TERMS or (j, k) not in PAIR_INDEX:
        raise OutOfRange(f"action {tuple(a)} outside the action space")
    return N_PAIRS * i + PAIR_INDEX[(j, k)] + 1


def decode(label: int) -> Action:
    if not 1 <= label <= N_LABELS:
        raise OutOfRange(f"label {label} outside 1..{N_LABELS}")
    i, p = divmod(label - 1, N_PAIRS)
    return Action(i, *PAIRS[p])


def _as_action(a) -> Action:
    return decode(a) if isinstance(a, int) else Action(*a)


# ------------------------------------------------------------------ rewriting


def _raw(f: Factor, exponent: int | None = None):
    return (f.kind, f.x_coef, f.phase12, f.exponent if exponent is None else exponent)


def _residual(factors: tuple[Factor, ...], used: dict[int, int]):
    out = []
    for n, f in enumerate(factors):
        e = f.exponent - used.get(n, 0)
        if e:
            out.append(_raw(f, e))
    return out


def _emit(out: list, coef: SurdScalar, residual, extra):
    t = make_term(coef, residual + extra)
    if t is not None:
        out.append(t)


def product_to_sum(coef: SurdScalar, residual, fa: Factor, fb: Factor) -> list[Term]:
    """Rewrite ``coef * residual * fa * fb`` (single copies of fa and fb)."""
    ax, ap = fa.x_coef, fa.phase12
    bx, bp = fb.x_coef, fb.phase12
    plus = (ax + bx, ap + bp)
    minus = (ax - bx, ap - bp)
    h = coef.half()
    out: list[Term] = []
    if fa.kind == COS and fb.kind == COS:
        _emit(out, h, residual, [(COS, *minus, 1)])
        _emit(out, h, residual, [(COS, *plus, 1)])
    elif fa.kind == COS and fb.kind == SIN:
        _emit(out, h, residual, [(SIN, *plus, 1)])
        _emit(out, -h, residual, [(SIN, *minus, 1)])
    elif fa.kind == SIN and fb.kind == COS:
        _emit(out, h, residual, [(SIN, *plus, 1)])
        _emit(out, h, residual, [(SIN, *minus, 1)])
    else:
        _emit(out, h, residual, [(COS, *minus, 1)])
        _emit(out, -h, residual, [(COS, *plus, 1)])
    return out


def angle_addition(coef: SurdScalar, residual, kind: int, alpha, beta) -> list[Term]:
    """Rewrite ``coef * residual * kind(alpha + beta)``; angles are (x_coef, phase12)."""
    out: list[Term] = []
    sa, ca = (SIN, *alpha, 1), (COS, *alpha, 1)
    sb, cb = (SIN, *beta, 1), (COS, *beta, 1)
    if kind == SIN:
        _emit(out, coef, residual, [sa, cb])
        _emit(out, coef, residual, [ca, sb])
    else:
        _emit(out, coef, residual, [ca, cb])
        _emit(out, -coef, residual, [sa, sb])
    return out


def rewrite_term(t: Term, j: int, k: int) -> tuple[Term, ...] | None:
    """Terms replacing ``t`` under slot pair (j, k), or None if not applicable."""
    fs = t.factors
    if j >= len(fs):
        return None
    fj = fs[j]
    if k == -1:
        if fj.phase12 == 0:
            return None
        residual = _residual(fs, {j: 1})
        return tuple(angle_addition(t.coef, residual, fj.kind, (fj.x_coef, 0), (0, fj.phase12)))
    if k == j:
        if fj.exponent < 2:
            return None
        residual = _residual(fs, {j: 2})
        return tuple(product_to_sum(t.coef, residual, fj, fj))
    if k >= len(fs):
        return None
    residual = _residual(fs, {j: 1, k: 1})
    return tuple(product_to_sum(t.coef, residual, fs[k], fj))


@lru_cache(maxsize=1 << 17)
def term_rewrites(t: Term) -> tuple[tuple[int, tuple[Term, ...]], ...]:
    """All applicable ``(pair_index, replacement_terms)`` for one term."""
    if len(t.factors) > MAX_SLOTS:
        return ()
    out = []
    for p, (j, k) in enumerate(PAIRS):
        r = rewrite_term(t, j, k)
        if r is not None:
            out.append((p, r))
    return tuple(out)


@lru_cache(maxsize=1 << 18)
def _order_key(factors):
    return (-sum(f.exponent for f in factors), factors)


def splice(e: Expression, i: int, new_terms) -> Expression:
    """Replace term ``i`` of ``e`` with ``new_terms``, merge and sort."""
    acc = {t.factors: t for n, t in enumerate(e.terms) if n != i}
    for t in new_terms:
        prev = acc.get(t.factors)
        if prev is None:
            acc[t.factors] = t
        else:
            s = prev.coef + t.coef
            if s.is_zero():
                del acc[t.factors]
            else:
                acc[t.factors] = Term(s, t.factors)
    return Expression(tuple(acc[f] for f in sorted(acc, key=_order_key)))


def rewrite(e: Expression, a) -> Expression:
    """Apply an action without the validity constraints (term limit, no-op)."""
    a = _as_action(a)
    if not 0 <= a.i < len(e.terms):
        raise InvalidAction(f"no term {a.i} in a {len(e.terms)}-term expression")
    r = rewrite_term(e.terms[a.i], a.j, a.k)
    if r is None:
        raise InvalidAction(f"action {a} does not apply")
    return splice(e, a.i, r)


@lru_cache(maxsize=1 << 15)
def moves(e: Expression) -> tuple[tuple[int, int, tuple[Term, ...]], ...]:
    """Every valid ``(label, term_index, replacement_terms)`` in ascending label order.

    Successors are not built here. Replacing ``t`` leaves the expression
    unchanged only when the replacement is ``t`` itself, and the term count is
    tracked through the coefficient map.
    """
    n = len(e.terms)
    if n > MAX_TERMS:
        return ()
    index = {t.factors: t.coef for t in e.terms}
    out = []
    for i, t in enumerate(e.terms):
        base = N_PAIRS * i + 1
        own = t.factors
        for p, new_terms in term_rewrites(t):
            if len(new_terms) == 1 and new_terms[0] == t:
                continue
            size = n - 1
            for u in new_terms:
                c = None if u.factors == own else index.get(u.factors)
                if c is None:
                    size += 1
                elif (c + u.coef).is_zero():
                    size -= 1
            if len(new_terms) == 2 and new_terms[0].factors == new_terms[1].factors:
                size = len(splice(e, i, new_terms).terms)
                if size == n and splice(e, i, new_terms) == canonicalize(e):
                    continue
            if size > MAX_TERMS:
                continue
            out.append((base + p, i, new_terms))
    return tuple(out)


@lru_cache(maxsize=1 << 15)
def successors(e: Expression) -> tuple[tuple[int, Expression], ...]:
    """Every valid ``(label, successor)`` of ``e`` in ascending label order."""
    return tuple((label, splice(e, i, new_terms)) for label, i, new_terms in moves(e))


def valid_labels(e: Expression) -> list[int]:
    return [m[0] for m in moves(e)]


def enumerate_valid(e: Expression) -> list[Action]:
    return [decode(m[0]) for m in moves(e)]


def is_valid(e: Expression, a) -> bool:
    try:
        label = a if isinstance(a, int) else encode(Action(*a))
    except OutOfRange:
        return False
    return any(m[0] == label for m in moves(e))


def apply(e: Expression, a) -> Expression:
    label = a if isinstance(a, int) else encode(Action(*a))
    for lab, i, new_terms in moves(e):
        if lab == label:
            return splice(e, i, new_terms)
    raise InvalidAction(f"action {decode(label) if 1 <= label <= N_LABELS else label} is not valid")


def rule_of(e: Expression, a) -> RuleKind:
    """Rule kind for a valid action.

    Angle-addition actions are always the plus variant; a negative phase is
    simply a negative beta.
    """
    a = _as_action(a)
    if not is_valid(e, a):
        raise InvalidAction(f"action {a} is not valid")
    fs = e.terms[a.i].factors
    fj = fs[a.j]
    if a.k == -1:
        return RuleKind.AsPlus if fj.kind == SIN else RuleKind.AcPlus
    fk = fs[a.k]
    return {
        (COS, COS): RuleKind.Pcc,
        (COS, SIN): RuleKind.Pcs,
        (SIN, COS): RuleKind.Psc,
        (SIN, SIN): RuleKind.Pss,
    }[(fk.kind, fj.kind)]


def display_kind(e: Expression, a) -> RuleKind:
    """Like rule_of, but names the minus variant when the split phase is negative."""
    a = _as_action(a)
    kind = rule_of(e, a)
    if a.k == -1 and e.terms[a.i].factors[a.j].phase12 < 0:
        return RuleKind.AsMinus if kind is RuleKind.AsPlus else RuleKind.AcMinus
    return kind


def describe(e: Expression, a) -> str:
    """Human-readable step: ``rule Psc on sin(x + pi/6)*cos(x + pi/3) (0,1,0)``."""
    from .syntax import factor_text

    a = _as_action(a)
    kind = display_kind(e, a)
    fs = e.terms[a.i].factors
    f1 = fs[a.j]._replace(exponent=1)
    if a.k == -1:
        target = factor_text(f1)
    elif a.k == a.j:
        target = factor_text(f1._replace(exponent=2))
    else:
        target = factor_text(fs[a.k]._replace(exponent=1)) + "*" + factor_text(f1)
    return f"rule {kind.value} on {target} {a}"
