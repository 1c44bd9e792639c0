"""Bottom-up synthesis of trigonometric identities.

Build ``E_0`` from random product terms, push it through random rule
rewrites to an equivalent ``E_t``, and emit ``E_t - E_0`` with obvious common
factors stripped. Every random draw goes through ``rng.choice``, so tests can
script the draws.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .expr import (
    COS,
    SIN,
    Expression,
    SurdScalar,
    Term,
    canonicalize,
    combine,
    make_term,
    negate,
    remove_common_factors,
    to_twelfths,
)
from .rules import angle_addition, product_to_sum, splice
from .search import derive_seed

_PHASES = tuple(Fraction(p) for p in ("0", "1/2", "-1/2", "1/3", "-1/3", "1/4", "-1/4", "1/6", "-1/6"))


@dataclass(frozen=True)
class GeneratorConfig:
    n_choices: tuple[int, ...] = (1, 2, 3, 4)
    A_choices: tuple[int, ...] = (0, 1, 2, 3, 4, 5, 6)
    B_choices: tuple[Fraction, ...] = _PHASES  # multiples of pi
    C_choices: tuple[int, ...] = (0, 1, -1, 2, -2, 3, -3, 4, -4)
    m_choices: tuple[int, ...] = (1, 2, 3)
    t_choices: tuple[int, ...] = (2, 3, 4, 5, 6)
    split_a_choices: tuple[int, ...] = (0, 1, 2, 3, 4, 5, 6)
    split_b_choices: tuple[Fraction, ...] = _PHASES
    max_terms: int = 8
    max_degree: int = 4

    def __post_init__(self):
        for name in ("n_choices", "A_choices", "B_choices", "C_choices", "m_choices",
                     "t_choices", "split_a_choices", "split_b_choices"):
            if not getattr(self, name):
                raise ValueError(f"{name} must be nonempty")
        if self.max_terms < 1:
            raise ValueError("max_terms must be >= 1")
        if not any(self.C_choices):
            raise ValueError("C_choices needs a nonzero value")


@dataclass
class IdentityRecord:
    identity: Expression
    seed: int
    trace: list[str] = field(default_factory=list)
    id: str = ""


@dataclass(frozen=True)
class Rejected:
    """A draw that produced no usable identity."""

    reason: str


def random_term(rng, cfg: GeneratorConfig = GeneratorConfig(), redraw_zero: bool = False) -> Term | None:
    """``C * prod trig_i(A_i x + B_i)``, or None for the zero term.

    Repeated elements merge into exponents. With ``redraw_zero`` a zero C is
    drawn again; a product that folds to 0 (e.g. ``sin(0)``) still gives None.
    """
    n = rng.choice(cfg.n_choices)
    raw = []
    for _ in range(n):
        kind = rng.choice((SIN, COS))
        A = rng.choice(cfg.A_choices)
        B = rng.choice(cfg.B_choices)
        raw.append((kind, A, to_twelfths(B), 1))
    C = rng.choice(cfg.C_choices)
    while redraw_zero and C == 0:
        C = rng.choice(cfg.C_choices)
    if C == 0:
        return None
    return make_term(SurdScalar.rational(C), raw)


def type_p(e: Expression, i: int, j: int, k: int) -> Expression:
    """Product-to-sum on slots (j, k) of term i, with no term-count limit."""
    t = e.terms[i]
    fs = t.factors
    used = {j: 2} if j == k else {j: 1, k: 1}
    residual = []
    for n, f in enumerate(fs):
        left = f.exponent - used.get(n, 0)
        if left:
            residual.append((f.kind, f.x_coef, f.phase12, left))
    return splice(e, i, product_to_sum(t.coef, residual, fs[k], fs[j]))


def type_a(e: Expression, i: int, j: int, a: int, b) -> Expression:
    """Split factor j of term i as ``((A-a)x + (B-b)) + (a x + b)`` and expand."""
    t = e.terms[i]
    f = t.factors[j]
    b12 = to_twelfths(b)
    residual = []
    for n, g in enumerate(t.factors):
        left = g.exponent - (1 if n == j else 0)
        if left:
            residual.append((g.kind, g.x_coef, g.phase12, left))
    alpha = (f.x_coef - a, f.phase12 - b12)
    beta = (a, b12)
    return splice(e, i, angle_addition(t.coef, residual, f.kind, alpha, beta))


def _pairs(t: Term) -> list[tuple[int, int]]:
    out = []
    for j, f in enumerate(t.factors):
        for k in range(j + 1):
            if k < j or f.exponent >= 2:
                out.append((j, k))
    return out


def random_transform(rng, e: Expression, cfg: GeneratorConfig = GeneratorConfig(),
                     log: list | None = None) -> Expression:
    """One Type-P or Type-A rewrite of ``e``; returns ``e`` unchanged after 20 degenerate draws."""
    for _ in range(20):
        kind = rng.choice(("P", "A"))
        if kind == "P":
            cands = [i for i, t in enumerate(e.terms) if _pairs(t)]
            if not cands:
                continue
            i = rng.choice(cands)
            j, k = rng.choice(_pairs(e.terms[i]))
            if log is not None:
                log.append(f"P term={i} slots=({j},{k})")
            return type_p(e, i, j, k)
        cands = [i for i, t in enumerate(e.terms) if t.factors]
        if not cands:
            continue
        i = rng.choice(cands)
        t = e.terms[i]
        j = rng.choice(range(len(t.factors)))
        f = t.factors[j]
        a = rng.choice(cfg.split_a_choices)
        b = rng.choice(cfg.split_b_choices)
        b12 = to_twelfths(b)
        if (a == 0 and b12 == 0) or (a == f.x_coef and b12 == f.phase12):
            continue
        if log is not None:
            log.append(f"A term={i} slot={j} split=({a}, {b})")
        return type_a(e, i, j, a, b)
    return e


def random_expression(rng, cfg: GeneratorConfig = GeneratorConfig()) -> Expression:
    m = rng.choice(cfg.m_choices)
    terms = [t for t in (random_term(rng, cfg, redraw_zero=True) for _ in range(m)) if t is not None]
    return combine(terms)


def finish_identity(e_t: Expression, e_0: Expression) -> Expression:
    """``E_t - E_0`` with common factors removed, canonical."""
    diff = combine(e_t.terms + negate(e_0).terms)
    if diff.is_zero:
        return diff
    return canonicalize(remove_common_factors(diff))


def generate_identity(rng, cfg: GeneratorConfig = GeneratorConfig()) -> IdentityRecord | Rejected:
    """One identity, or ``Rejected`` when the draw is trivial or too large."""
    log: list[str] = []
    e0 = random_expression(rng, cfg)
    if e0.is_zero:
        return Rejected("zero start expression")
    log.append(f"E0 = {e0}")
    e = e0
    for _ in range(rng.choice(cfg.t_choices)):
        if e.is_zero:
            break
        e = random_transform(rng, e, cfg, log)
    ident = finish_identity(e, e0)
    if ident.is_zero:
        return Rejected("trivial")
    if len(ident) > cfg.max_terms:
        return Rejected("too many terms")
    if ident.max_degree > cfg.max_degree:
        return Rejected("degree too high")
    return IdentityRecord(ident, 0, log)


def generate_corpus(count: int, seed: int, cfg: GeneratorConfig = GeneratorConfig()) -> list[IdentityRecord]:
    """Exactly ``count`` distinct identities; draw ``n`` uses sub-seed ``derive_seed(seed, n)``."""
    if count < 1:
        raise ValueError("count must be >= 1")
    out: list[IdentityRecord] = []
    seen: set[Expression] = set()
    n = 0
    while len(out) < count:
        sub = derive_seed(seed, n)
        n += 1
        rec = generate_identity(random.Random(sub), cfg)
        if isinstance(rec, Rejected) or rec.identity in seen:
            continue
        seen.add(rec.identity)
        rec.seed = sub
        rec.id = f"s{seed}-{len(out):06d}"
        out.append(rec)
    return out


__all__ = [
    "GeneratorConfig",
    "IdentityRecord",
    "random_term",
    "random_transform",
    "type_a",
    "type_p",
    "generate_identity",
    "generate_corpus",
    "finish_identity",
    "Rejected",
]
