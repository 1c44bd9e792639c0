"""Provers (Naive, Filter, BFS, rBFS, policy-guided), the trace checker, and the bench harness."""
from __future__ import annotations

import math
import random
import statistics
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

from .expr import Expression, canonicalize, eval_numeric, magnitude, shuffle_terms
from .rules import N_LABELS, moves, splice, successors

__all__ = [
    "SearchConfig",
    "ProofTrace",
    "MethodMetrics",
    "MetricsReport",
    "prove_naive",
    "prove_filter",
    "prove_bfs",
    "prove_rbfs",
    "prove_policy",
    "verify_trace",
    "bench",
    "derive_seed",
]


@dataclass(frozen=True)
class SearchConfig:
    max_depth: int = 12  # BFS / rBFS
    max_steps: int = 40  # Naive / Filter / policy
    rbfs_branches: int = 3
    node_budget: int = 200_000
    top_n: int = 1
    restart_mode: bool = False  # policy: N greedy restarts instead of per-node top-N
    shuffle_each_step: bool = False

    def __post_init__(self):
        for name in ("max_depth", "max_steps", "rbfs_branches", "node_budget", "top_n"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")


@dataclass
class ProofTrace:
    """Steps ``(state, label)``; on success ``terminal`` is the zero expression."""

    steps: list[tuple[Expression, int]]
    terminal: Expression
    wall_time: float = 0.0
    method: str = ""
    reason: str = ""  # failure cause, empty on success
    expanded: int = 0

    @property
    def success(self) -> bool:
        return self.terminal.is_zero and not self.reason

    @property
    def length(self) -> int:
        return len(self.steps)

    @property
    def labels(self) -> list[int]:
        return [a for _, a in self.steps]

    @property
    def initial(self) -> Expression:
        return self.steps[0][0] if self.steps else self.terminal


def _finish(steps, terminal, t0, method, reason="", expanded=0) -> ProofTrace:
    return ProofTrace(list(steps), terminal, time.perf_counter() - t0, method, reason, expanded)


def _maybe_shuffle(s: Expression, cfg: SearchConfig, rng) -> Expression:
    if cfg.shuffle_each_step and len(s) > 1:
        return shuffle_terms(s, rng)[0]
    return s


def prove_naive(e: Expression, rng: random.Random, cfg: SearchConfig = SearchConfig()) -> ProofTrace:
    """Uniform draw over all 112 labels each step; an invalid draw fails."""
    t0 = time.perf_counter()
    steps = []
    s = e
    for _ in range(cfg.max_steps):
        if s.is_zero:
            return _finish(steps, s, t0, "naive")
        label = rng.randint(1, N_LABELS)
        move = next((m for m in moves(s) if m[0] == label), None)
        if move is None:
            return _finish(steps, s, t0, "naive", "invalid action")
        child = splice(s, move[1], move[2])
        steps.append((s, label))
        s = _maybe_shuffle(child, cfg, rng)
    if s.is_zero:
        return _finish(steps, s, t0, "naive")
    return _finish(steps, s, t0, "naive", "max steps")


def prove_filter(e: Expression, rng: random.Random, cfg: SearchConfig = SearchConfig()) -> ProofTrace:
    """Uniform draw over valid actions each step."""
    t0 = time.perf_counter()
    steps = []
    s = e
    for _ in range(cfg.max_steps):
        if s.is_zero:
            return _finish(steps, s, t0, "filter")
        ms = moves(s)
        if not ms:
            return _finish(steps, s, t0, "filter", "no valid action")
        label, i, new_terms = ms[rng.randrange(len(ms))]
        child = splice(s, i, new_terms)
        steps.append((s, label))
        s = _maybe_shuffle(child, cfg, rng)
    if s.is_zero:
        return _finish(steps, s, t0, "filter")
    return _finish(steps, s, t0, "filter", "max steps")


def _level_search(e: Expression, cfg: SearchConfig, pick, method: str) -> ProofTrace:
    """Level-order search with a visited set; ``pick(s)`` yields the branches to expand.

    Children are generated in ascending label order and parents are expanded in
    discovery order, so the first proof found is the shortest and, among those,
    the lexicographically smallest label sequence within the explored tree.
    """
    t0 = time.perf_counter()
    if e.is_zero:
        return _finish([], e, t0, method)
    root_key = canonicalize(e)
    parent: dict[Expression, tuple[Expression, int] | None] = {root_key: None}
    frontier = [e]
    expanded = 0
    for _depth in range(cfg.max_depth):
        nxt = []
        for s in frontier:
            if expanded >= cfg.node_budget:
                return _finish([], e, t0, method, "node budget", expanded)
            expanded += 1
            for label, child in pick(s):
                if child in parent:
                    continue
                parent[child] = (s, label)
                if child.is_zero:
                    steps = []
                    node = child
                    while True:
                        link = parent[node]
                        if link is None:
                            break
                        node, lab = link
                        steps.append((node, lab))
                        if node is e:
                            break
                    steps.reverse()
                    return _finish(steps, child, t0, method, "", expanded)
                nxt.append(child)
        if not nxt:
            return _finish([], e, t0, method, "exhausted", expanded)
        frontier = nxt
    return _finish([], e, t0, method, "max depth", expanded)


def prove_bfs(e: Expression, cfg: SearchConfig = SearchConfig()) -> ProofTrace:
    return _level_search(e, cfg, successors, "bfs")


def prove_rbfs(e: Expression, rng: random.Random, cfg: SearchConfig = SearchConfig()) -> ProofTrace:
    """BFS that expands only ``rbfs_branches`` uniformly sampled valid actions per node."""
    b = cfg.rbfs_branches

    def pick(s):
        ms = moves(s)
        if len(ms) > b:
            ms = [ms[n] for n in sorted(rng.sample(range(len(ms)), b))]
        return [(label, splice(s, i, new_terms)) for label, i, new_terms in ms]

    return _level_search(e, cfg, pick, "rbfs")


# A scorer maps a state to {label: score} over its valid actions.
Scorer = Callable[[Expression], dict]


def _ranked(scorer: Scorer, s: Expression) -> list[tuple[int, Expression]]:
    succ = successors(s)
    if not succ:
        return []
    scores = scorer(s)
    return sorted(succ, key=lambda lc: (-scores[lc[0]], lc[0]))


def prove_policy(e: Expression, scorer: Scorer, cfg: SearchConfig = SearchConfig(),
                 rng: random.Random | None = None) -> ProofTrace:
    """Depth-first search over the ``top_n`` highest-scoring valid actions per node.

    Actions leading back to a state on the current path are skipped before the
    top ``top_n`` are taken, so ``top_n=1`` is a loop-free greedy rollout.

    With ``cfg.restart_mode`` the search instead makes ``top_n`` greedy
    rollouts, the r-th starting from the r-th ranked root action.
    """
    t0 = time.perf_counter()
    if e.is_zero:
        return _finish([], e, t0, "policy")
    if rng is None:
        rng = random.Random(0)
    if cfg.restart_mode:
        return _policy_restarts(e, scorer, cfg, rng, t0)

    expanded = 0
    # Deepest remaining budget at which a state was already searched without success.
    failed: dict[Expression, int] = {}
    on_path: set[Expression] = set()
    steps: list[tuple[Expression, int]] = []

    def dfs(s: Expression, remaining: int) -> Expression | None:
        nonlocal expanded
        if s.is_zero:
            return s
        key = canonicalize(s)
        if remaining == 0 or key in on_path or failed.get(key, -1) >= remaining:
            return None
        if expanded >= cfg.node_budget:
            raise _Budget
        expanded += 1
        on_path.add(key)
        fresh = [(label, child) for label, child in _ranked(scorer, s) if child not in on_path]
        for label, child in fresh[: cfg.top_n]:
            steps.append((s, label))
            found = dfs(_maybe_shuffle(child, cfg, rng), remaining - 1)
            if found is not None:
                return found
            steps.pop()
        on_path.discard(key)
        failed[key] = remaining
        return None

    try:
        found = dfs(e, cfg.max_steps)
    except _Budget:
        return _finish([], e, t0, "policy", "node budget", expanded)
    if found is None:
        return _finish([], e, t0, "policy", "exhausted", expanded)
    return _finish(steps, found, t0, "policy", "", expanded)


class _Budget(Exception):
    pass


def _policy_restarts(e, scorer, cfg, rng, t0) -> ProofTrace:
    expanded = 0
    first = _ranked(scorer, e)[: cfg.top_n]
    for label, child in first:
        steps = [(e, label)]
        s = _maybe_shuffle(child, cfg, rng)
        seen = {canonicalize(e)}
        while not s.is_zero and len(steps) < cfg.max_steps:
            key = canonicalize(s)
            if key in seen:
                break
            seen.add(key)
            expanded += 1
            ranked = [(lab, c) for lab, c in _ranked(scorer, s) if c not in seen]
            if not ranked:
                break
            lab, nxt = ranked[0]
            steps.append((s, lab))
            s = _maybe_shuffle(nxt, cfg, rng)
        if s.is_zero:
            return _finish(steps, s, t0, "policy", "", expanded)
    return _finish([], e, t0, "policy", "exhausted", expanded)


# ------------------------------------------------------------------ checking


def verify_trace(t: ProofTrace, rng: random.Random | None = None, n_points: int = 10,
                 tol: float = 1e-9) -> bool:
    """Independently replay a trace: every step valid, successors match, terminal zero."""
    if not t.terminal.is_zero:
        return False
    rng = rng or random.Random(12345)
    for n, (state, label) in enumerate(t.steps):
        nxt = t.steps[n + 1][0] if n + 1 < len(t.steps) else t.terminal
        child = dict(successors(state)).get(label)
        if child is None or canonicalize(child) != canonicalize(nxt):
            return False
        scale = 1.0 + magnitude(state) + magnitude(nxt)
        for _ in range(n_points):
            x = rng.uniform(-10, 10)
            if abs(eval_numeric(state, x) - eval_numeric(nxt, x)) > tol * scale:
                return False
    return True


# ------------------------------------------------------------------ bench

METHODS = ("naive", "filter", "bfs", "rbfs", "policy")
STOCHASTIC = {"naive", "filter", "rbfs"}


def derive_seed(*parts) -> int:
    """Deterministic 64-bit sub-seed from a tuple of ints/strings."""
    import hashlib

    h = hashlib.blake2b(repr(parts).encode(), digest_size=8)
    return int.from_bytes(h.digest(), "little")


@dataclass
class MethodMetrics:
    pass_rate: float
    avg_length: float  # over solved runs; nan when nothing was solved
    avg_time: float
    runs: int
    solved: int

    def as_dict(self) -> dict:
        return {
            "pass_rate": self.pass_rate,
            "avg_length": None if math.isnan(self.avg_length) else self.avg_length,
            "avg_time": self.avg_time,
            "runs": self.runs,
            "solved": self.solved,
        }


@dataclass
class MetricsReport:
    methods: dict[str, MethodMetrics]
    repeats: int
    rows: list[dict] = field(default_factory=list)

    def table(self) -> str:
        lines = [f"{'method':<10}{'pass rate':>11}{'length':>9}{'time (s)':>11}"]
        for name, m in self.methods.items():
            length = "-" if math.isnan(m.avg_length) else f"{m.avg_length:.2f}"
            lines.append(f"{name:<10}{m.pass_rate:>11.4f}{length:>9}{m.avg_time:>11.3f}")
        return "\n".join(lines)


def summarize(rows: Sequence[dict], repeats: int) -> MetricsReport:
    by: dict[str, list[dict]] = {}
    for r in rows:
        by.setdefault(r["method"], []).append(r)
    methods = {}
    for name, rs in by.items():
        solved = [r["length"] for r in rs if r["success"]]
        methods[name] = MethodMetrics(
            pass_rate=len(solved) / len(rs),
            avg_length=statistics.fmean(solved) if solved else float("nan"),
            avg_time=statistics.fmean(r["wall_time_s"] for r in rs),
            runs=len(rs),
            solved=len(solved),
        )
    return MetricsReport(methods, repeats, list(rows))


def run_method(method: str, e: Expression, cfg: SearchConfig, seed: int,
               scorer: Scorer | None = None) -> ProofTrace:
    rng = random.Random(seed)
    if method == "naive":
        return prove_naive(e, rng, cfg)
    if method == "filter":
        return prove_filter(e, rng, cfg)
    if method == "bfs":
        return prove_bfs(e, cfg)
    if method == "rbfs":
        return prove_rbfs(e, rng, cfg)
    if method == "policy":
        if scorer is None:
            raise ValueError("policy method needs a scorer")
        return prove_policy(e, scorer, cfg, rng)
    raise ValueError(f"unknown method {method!r}")


def bench(problems: Sequence[tuple[str, Expression]], methods: Sequence[str], repeats: int,
          cfg: SearchConfig = SearchConfig(), seed: int = 0,
          scorer: Scorer | None = None, configs: dict[str, SearchConfig] | None = None,
          traces: list | None = None) -> MetricsReport:
    """Run every method on every problem; stochastic methods ``repeats`` times.

    ``configs`` optionally overrides the search config per method. When
    ``traces`` is a list, the raw ProofTrace objects are appended to it.
    """
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    configs = configs or {}
    rows = []
    for method in methods:
        mcfg = configs.get(method, cfg)
        reps = repeats if method in STOCHASTIC or (method == "policy" and mcfg.shuffle_each_step) else 1
        for pid, e in problems:
            for r in range(reps):
                s = derive_seed(seed, method, pid, r)
                t = run_method(method, e, mcfg, s, scorer)
                rows.append({
                    "problem_id": pid,
                    "method": method,
                    "repeat": r,
                    "seed": s,
                    "success": t.success,
                    "length": t.length if t.success else None,
                    "wall_time_s": t.wall_time,
                })
                if traces is not None:
                    traces.append((pid, method, s, t))
    return summarize(rows, repeats)


def with_overrides(cfg: SearchConfig, **kw) -> SearchConfig:
    return replace(cfg, **{k: v for k, v in kw.items() if v is not None})
