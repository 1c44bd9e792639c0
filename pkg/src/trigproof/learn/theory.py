"""Rank-selection probabilities and the expected length of 3-branch random BFS."""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from math import comb

from ..expr import Expression, canonicalize
from ..rules import successors

INF = math.inf


class DomainError(ValueError):
    pass


class BudgetExceeded(RuntimeError):
    pass


def rank_probability(n: int, i: int) -> Fraction:
    """Chance that the i-th best of n branches is the best of a uniform 3-subset."""
    if n < 3:
        raise DomainError(f"need n >= 3, got {n}")
    if not 1 <= i <= n:
        raise DomainError(f"rank {i} outside 1..{n}")
    return Fraction(comb(n - i, 2), comb(n, 3))


def rank_frequencies(n: int, trials: int, rng: random.Random) -> list[float]:
    """Monte Carlo estimate of rank_probability(n, 1..n)."""
    counts = [0] * n
    ranks = range(n)
    for _ in range(trials):
        counts[min(rng.sample(ranks, 3))] += 1
    return [c / trials for c in counts]


def _expected_min(values: list[float], branches: int) -> float:
    """E[min] over a uniform ``branches``-subset of ``values``; all values if there are fewer."""
    n = len(values)
    if n == 0:
        return INF
    v = sorted(values)
    if n <= branches:
        return v[0]
    total = 0.0
    for i, x in enumerate(v, start=1):
        w = comb(n - i, branches - 1)
        if w == 0:
            break
        if x == INF:
            return INF
        total += w * x
    return total / comb(n, branches)


def _expected_min_given_success(values: list[float], branches: int) -> float:
    """As _expected_min, conditioned on the subset containing a finite value."""
    n = len(values)
    v = sorted(values)
    finite = [x for x in v if x != INF]
    if not finite:
        return INF
    if n <= branches:
        return v[0]
    num = 0.0
    den = 0
    for i, x in enumerate(finite, start=1):
        w = comb(n - i, branches - 1)
        num += w * x
        den += w
    return num / den


@dataclass
class ExpectedLength:
    value: float
    given_success: float
    states: int
    # (canonical state, remaining depth) -> L
    table: dict


def expected_rbfs_length(e: Expression, depth_cap: int, branches: int = 3,
                         node_budget: int = 200_000) -> ExpectedLength:
    """Memoized recursion L(s) = E min over sampled branches of (1 + L(child)).

    Branches that cannot reach zero within the remaining depth count as
    infinite. ``given_success`` drops the all-infinite subsets at every node.
    """
    if depth_cap < 0:
        raise DomainError("depth_cap must be >= 0")
    memo: dict = {}
    memo_cond: dict = {}

    def go(s: Expression, d: int) -> tuple[float, float]:
        if s.is_zero:
            return 0.0, 0.0
        if d == 0:
            return INF, INF
        key = (s, d)
        hit = memo.get(key)
        if hit is not None:
            return hit, memo_cond[key]
        if len(memo) >= node_budget:
            raise BudgetExceeded(f"more than {node_budget} (state, depth) entries")
        vals, conds = [], []
        for _label, child in successors(s):
            v, c = go(child, d - 1)
            vals.append(v + 1)
            conds.append(c + 1)
        out = _expected_min(vals, branches)
        out_c = _expected_min_given_success(conds, branches)
        memo[key] = out
        memo_cond[key] = out_c
        return out, out_c

    root = canonicalize(e)
    v, c = go(root, depth_cap)
    return ExpectedLength(v, c, len(memo), memo)


def action_values(e: Expression, depth_cap: int, branches: int = 3) -> dict[int, float]:
    """L(s, a) = 1 + L(s') for every valid action of ``e`` (remaining depth ``depth_cap - 1``)."""
    out = {}
    for label, child in successors(canonicalize(e)):
        out[label] = 1 + expected_rbfs_length(child, depth_cap - 1, branches).value
    return out


def rbfs_length_survival(e: Expression, depth_cap: int, branches: int = 3,
                         node_budget: int = 200_000) -> list[float]:
    """``P(L > l)`` for ``l = 0..depth_cap`` when every sampled subtree is independent.

    This is the expectation of the minimum (rather than the minimum of
    expectations) and ignores only the sharing of revisited states.
    """
    memo: dict = {}
    D = depth_cap
    ones = tuple(1.0 for _ in range(D + 1))
    zeros = tuple(0.0 for _ in range(D + 1))

    def go(s: Expression, d: int):
        if s.is_zero:
            return zeros
        if d == 0:
            return ones
        key = (s, d)
        hit = memo.get(key)
        if hit is not None:
            return hit
        if len(memo) >= node_budget:
            raise BudgetExceeded(f"more than {node_budget} (state, depth) entries")
        kids = [go(c, d - 1) for _label, c in successors(s)]
        n = len(kids)
        if n == 0:
            out = ones
        elif n <= branches:
            out = tuple(math.prod(k[l - 1] for k in kids) if l else 1.0 for l in range(D + 1))
        else:
            from itertools import combinations
            subsets = list(combinations(kids, branches))
            out = tuple(
                sum(math.prod(k[l - 1] for k in sub) for sub in subsets) / len(subsets) if l else 1.0
                for l in range(D + 1)
            )
        memo[key] = out
        return out

    return list(go(canonicalize(e), D))


def survival_summary(surv: list[float]) -> tuple[float, float]:
    """(success probability, mean length given success) from a survival curve."""
    p = 1.0 - surv[-1]
    if p <= 0:
        return 0.0, INF
    mean = sum(l * (surv[l - 1] - surv[l]) for l in range(1, len(surv))) / p
    return p, mean
