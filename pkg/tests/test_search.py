import itertools
import math
import random

import pytest

from trigproof.expr import canonicalize
from trigproof.fixtures import GOLDEN, golden
from trigproof.gen import generate_corpus
from trigproof.rules import RuleKind, display_kind, successors
from trigproof.search import (
    ProofTrace,
    SearchConfig,
    bench,
    prove_bfs,
    prove_filter,
    prove_naive,
    prove_policy,
    prove_rbfs,
    verify_trace,
)
from trigproof.syntax import parse

ZERO = parse("0")


def _min_depth(e, limit):
    """Shortest proof length by exhaustive deepening, no visited set."""
    level = [e]
    for d in range(limit + 1):
        if any(s.is_zero for s in level):
            return d
        level = [c for s in level for _, c in successors(s)]
    return None


def _reachable(e, depth):
    seen = {e}
    frontier = [e]
    for _ in range(depth):
        nxt = []
        for s in frontier:
            for _, c in successors(s):
                if c not in seen:
                    seen.add(c)
                    nxt.append(c)
        frontier = nxt
    return seen


@pytest.fixture(scope="module")
def small_corpus():
    return [r.identity for r in generate_corpus(60, seed=1) if len(r.identity) <= 5]


# ------------------------------------------------------------------ BFS


@pytest.mark.parametrize("name", sorted(GOLDEN))
def test_bfs_golden_lengths(name):
    t = prove_bfs(golden(name))
    assert t.success
    assert t.length == GOLDEN[name][1]
    assert verify_trace(t)


def test_bfs_matches_exhaustive_deepening(small_corpus):
    checked = 0
    for e in small_corpus:
        d = _min_depth(e, 2)
        if d is None:
            continue
        t = prove_bfs(e, SearchConfig(max_depth=3))
        assert t.success and t.length == d
        checked += 1
    assert checked >= 5


def test_bfs_zero_input():
    t = prove_bfs(ZERO)
    assert t.success and t.length == 0


def test_bfs_budget_reported():
    t = prove_bfs(golden("five_step"), SearchConfig(node_budget=10))
    assert not t.success and t.reason == "node budget"


def test_bfs_is_deterministic():
    a = prove_bfs(golden("four_step"))
    b = prove_bfs(golden("four_step"))
    assert a.labels == b.labels and a.steps == b.steps


# ------------------------------------------------------------------ naive / filter


def test_naive_zero_is_immediate_success():
    t = prove_naive(ZERO, random.Random(0))
    assert t.success and t.length == 0


def test_naive_rarely_succeeds(small_corpus):
    wins = sum(prove_naive(e, random.Random(n)).success for n, e in enumerate(small_corpus))
    assert wins / len(small_corpus) < 0.2


def test_one_step_has_no_dead_ends():
    for s in _reachable(golden("one_step"), 6):
        assert s.is_zero or successors(s)


def test_filter_on_one_step_always_succeeds():
    e = golden("one_step")
    cfg = SearchConfig(max_steps=400)
    for seed in range(30):
        t = prove_filter(e, random.Random(seed), cfg)
        assert t.success and verify_trace(t)


def test_filter_longer_than_rbfs_longer_than_bfs_on_five_step():
    e = golden("five_step")
    cfg = SearchConfig(max_steps=200)
    filt = [prove_filter(e, random.Random(s), cfg) for s in range(20)]
    rb = [prove_rbfs(e, random.Random(s), SearchConfig()) for s in range(10)]
    filt_len = [t.length for t in filt if t.success]
    rb_len = [t.length for t in rb if t.success]
    assert filt_len and rb_len
    mean_f = sum(filt_len) / len(filt_len)
    mean_r = sum(rb_len) / len(rb_len)
    assert min(rb_len) >= 5
    assert 5 <= mean_r <= mean_f


def test_filter_reproducible():
    e = golden("generated")
    a = prove_filter(e, random.Random(7))
    b = prove_filter(e, random.Random(7))
    assert a.labels == b.labels


# ------------------------------------------------------------------ rBFS


def test_rbfs_reproducible():
    e = golden("five_step")
    a = prove_rbfs(e, random.Random(3))
    b = prove_rbfs(e, random.Random(3))
    assert a.labels == b.labels and a.success == b.success


def test_rbfs_equals_bfs_when_out_degree_small():
    e = golden("generated")
    assert max(len(successors(s)) for s in _reachable(e, 6)) <= 3
    bfs = prove_bfs(e)
    for seed in range(5):
        assert prove_rbfs(e, random.Random(seed)).labels == bfs.labels


@pytest.mark.parametrize("name", sorted(GOLDEN))
def test_rbfs_with_full_branching_is_bfs(name):
    e = golden(name)
    t = prove_rbfs(e, random.Random(0), SearchConfig(rbfs_branches=112))
    assert t.labels == prove_bfs(e).labels


def test_rbfs_never_shorter_than_bfs(small_corpus):
    for n, e in enumerate(small_corpus[:15]):
        b = prove_bfs(e, SearchConfig(node_budget=3000))
        r = prove_rbfs(e, random.Random(n), SearchConfig(node_budget=3000))
        if b.success and r.success:
            assert r.length >= b.length


# ------------------------------------------------------------------ policy


def _label_scorer(s):
    return {label: -label for label, _ in successors(s)}


def test_policy_top1_is_greedy():
    e = golden("generated")
    t = prove_policy(e, _label_scorer, SearchConfig(top_n=1))
    s = e
    seen = {canonicalize(e)}
    for state, label in t.steps:
        assert state == s
        fresh = [(lab, c) for lab, c in successors(s) if c not in seen]
        assert label == fresh[0][0]
        s = dict(successors(s))[label]
        seen.add(canonicalize(s))


def test_policy_top1_success_implies_wider_success():
    # The wider search descends along the greedy path first.
    corpus = [r.identity for r in generate_corpus(20, seed=4)]
    for e in corpus:
        greedy = prove_policy(e, _label_scorer, SearchConfig(top_n=1, max_steps=12))
        if greedy.success:
            for n in (3, 5):
                wide = prove_policy(e, _label_scorer, SearchConfig(top_n=n, max_steps=12, node_budget=10**6))
                assert wide.success and wide.labels[: greedy.length] == greedy.labels


def test_policy_wider_search_never_hurts_without_budget():
    corpus = [r.identity for r in generate_corpus(20, seed=4)]
    prev = 0
    for n in (1, 3, 5):
        cfg = SearchConfig(top_n=n, max_steps=4, node_budget=10**6)
        wins = sum(prove_policy(e, _label_scorer, cfg).success for e in corpus)
        assert wins >= prev
        prev = wins


def test_policy_restart_mode_traces_verify():
    cfg = SearchConfig(top_n=3, restart_mode=True)
    t = prove_policy(golden("one_step"), _label_scorer, cfg)
    assert t.success and verify_trace(t)


def test_policy_zero_input():
    t = prove_policy(ZERO, _label_scorer)
    assert t.success and t.length == 0


# ------------------------------------------------------------------ trace checking


def _label_to(state, target):
    for label, child in successors(state):
        if canonicalize(child) == canonicalize(target):
            return label
    raise AssertionError("no valid action reaches the target")


def test_hand_written_proof_verifies():
    s0 = golden("generated")
    s1 = parse("sqrt(3)*sin(x)/2 + sqrt(3)*sin(5*x)/2 + cos(x)/2 - cos(5*x)/2"
               " - cos(x - pi/3) + cos(5*x + pi/3)")
    s2 = parse("sqrt(3)*sin(5*x)/2 - cos(5*x)/2 + cos(5*x + pi/3)")
    states = [s0, s1, s2, ZERO]
    steps = [(a, _label_to(a, b)) for a, b in zip(states, states[1:])]
    kinds = [display_kind(s, lab) for s, lab in steps]
    assert kinds == [RuleKind.Pss, RuleKind.AcMinus, RuleKind.AcPlus]
    assert verify_trace(ProofTrace(steps, ZERO))


def test_tampered_trace_rejected():
    t = prove_bfs(golden("five_step"))
    s, label = t.steps[2]
    others = [lab for lab, _ in successors(s) if lab != label]
    bad = list(t.steps)
    bad[2] = (s, others[0])
    assert not verify_trace(ProofTrace(bad, t.terminal))


def test_trace_without_zero_terminal_rejected():
    e = golden("one_step")
    label, child = successors(e)[0]
    if child.is_zero:
        label, child = successors(e)[1]
    assert not verify_trace(ProofTrace([(e, label)], child))


def test_invalid_label_rejected():
    e = golden("one_step")
    valid = {lab for lab, _ in successors(e)}
    bad = next(lab for lab in range(1, 113) if lab not in valid)
    assert not verify_trace(ProofTrace([(e, bad)], ZERO))


# ------------------------------------------------------------------ bench


def test_bench_bfs_on_fixtures():
    problems = [(n, golden(n)) for n in sorted(GOLDEN)]
    rep = bench(problems, ["bfs"], repeats=1)
    m = rep.methods["bfs"]
    assert m.pass_rate == 1.0
    assert math.isclose(m.avg_length, 13 / 4)


def test_bench_deterministic_apart_from_timings():
    problems = [(n, golden(n)) for n in ("one_step", "generated")]

    def strip(rep):
        return [{k: v for k, v in r.items() if k != "wall_time_s"} for r in rep.rows]

    a = bench(problems, ["filter", "rbfs"], repeats=3, seed=9)
    b = bench(problems, ["filter", "rbfs"], repeats=3, seed=9)
    assert strip(a) == strip(b)
    assert len(a.rows) == 2 * 2 * 3


def test_bench_rejects_bad_input():
    with pytest.raises(ValueError):
        bench([("p", golden("one_step"))], ["bfs"], repeats=0)
    with pytest.raises(ValueError):
        bench([("p", golden("one_step"))], ["magic"], repeats=1)


def test_search_config_validation():
    with pytest.raises(ValueError):
        SearchConfig(top_n=0)
    with pytest.raises(ValueError):
        SearchConfig(max_depth=0)


def test_every_trace_step_is_a_valid_successor():
    for name in GOLDEN:
        t = prove_bfs(golden(name))
        for (s, a), nxt in itertools.zip_longest(t.steps, [x for x, _ in t.steps[1:]] + [t.terminal]):
            assert dict(successors(s))[a] == nxt
