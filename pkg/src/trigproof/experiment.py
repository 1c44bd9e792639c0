"""End-to-end corpus experiment: collect rBFS proofs, train, fine-tune and compare provers.

Each stage is a plain function so tests and scripts can run only what they
need; ``Experiment`` caches stage results.
"""
from __future__ import annotations

import logging
import random
import statistics
import time
from dataclasses import dataclass, field
from functools import cached_property

from .gen import IdentityRecord, generate_corpus
from .learn.dataset import StateActionPair, augment, extract_pairs
from .learn.policy import FinetuneResult, PolicyModel, RLConfig, reinforce_finetune, train_imitation
from .search import SearchConfig, bench, derive_seed, prove_bfs, prove_rbfs

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExperimentConfig:
    corpus_size: int = 1000
    held_out: int = 200
    seed: int = 1
    rbfs_budget: int = 5000
    bfs_budget: int = 2000
    policy_budget: int = 2000
    max_steps: int = 40
    rbfs_repeats: int = 5
    filter_repeats: int = 5
    augment: int = 3
    epochs: int = 60
    lr: float = 0.05
    rl: RLConfig = field(default_factory=lambda: RLConfig(episodes=3, learning_rate=0.005))
    rl_problems: int = 300

    def __post_init__(self):
        if not 0 < self.held_out < self.corpus_size:
            raise ValueError("held_out must lie strictly between 0 and corpus_size")

    def search(self, **kw) -> SearchConfig:
        base = dict(max_steps=self.max_steps, node_budget=self.policy_budget)
        base.update(kw)
        return SearchConfig(**base)


@dataclass
class Summary:
    pass_rate: float
    avg_length: float
    runs: int
    lengths: list = field(default_factory=list, repr=False)  # per run, None on failure

    def as_dict(self) -> dict:
        return {"pass_rate": self.pass_rate, "avg_length": self.avg_length, "runs": self.runs}


def _summary(rows) -> Summary:
    solved = [r["length"] for r in rows if r["success"]]
    avg = statistics.fmean(solved) if solved else float("nan")
    lengths = [r["length"] if r["success"] else None for r in rows]
    return Summary(len(solved) / len(rows), avg, len(rows), lengths)


def _repeat_mean(rows, repeats: int) -> Summary:
    """Per-repeat pass rate and average length, averaged over repeats."""
    per = [_summary([r for r in rows if r["repeat"] == k]) for k in range(repeats)]
    return Summary(statistics.fmean(s.pass_rate for s in per),
                   statistics.fmean(s.avg_length for s in per), len(rows),
                   [r["length"] if r["success"] else None for r in rows])


class Experiment:
    def __init__(self, cfg: ExperimentConfig = ExperimentConfig()):
        self.cfg = cfg
        self.timings: dict[str, float] = {}
        self._policy_runs: dict = {}

    def _timed(self, name, fn):
        t0 = time.perf_counter()
        out = fn()
        self.timings[name] = time.perf_counter() - t0
        log.info("%s done in %.1fs", name, self.timings[name])
        return out

    # ---------------------------------------------------------------- data

    @cached_property
    def corpus(self) -> list[IdentityRecord]:
        return self._timed("corpus", lambda: generate_corpus(self.cfg.corpus_size, self.cfg.seed))

    @property
    def train_set(self) -> list[IdentityRecord]:
        return self.corpus[: self.cfg.corpus_size - self.cfg.held_out]

    @property
    def held_set(self) -> list[IdentityRecord]:
        return self.corpus[self.cfg.corpus_size - self.cfg.held_out:]

    @property
    def held_problems(self):
        return [(r.id, r.identity) for r in self.held_set]

    @cached_property
    def pairs(self) -> list[StateActionPair]:
        def collect():
            cfg = SearchConfig(node_budget=self.cfg.rbfs_budget)
            rng = random.Random(derive_seed(self.cfg.seed, "augment"))
            out = []
            for r in self.train_set:
                t = prove_rbfs(r.identity, random.Random(derive_seed(self.cfg.seed, "collect", r.id)), cfg)
                if not t.success:
                    continue
                for p in extract_pairs(t, r.id):
                    out.append(p)
                    out.extend(augment(p, rng, self.cfg.augment))
            return out

        return self._timed("collect", collect)

    # ---------------------------------------------------------------- models

    @cached_property
    def model(self) -> PolicyModel:
        return self._timed("train", lambda: train_imitation(self.pairs, epochs=self.cfg.epochs,
                                                             lr=self.cfg.lr, seed=self.cfg.seed))

    @cached_property
    def finetuned(self) -> FinetuneResult:
        problems = [r.identity for r in self.train_set[: self.cfg.rl_problems]]
        return self._timed("finetune", lambda: reinforce_finetune(self.model, problems, self.cfg.rl,
                                                                  seed=self.cfg.seed))

    # ---------------------------------------------------------------- evaluation

    def policy(self, top_n: int = 1, shuffle: bool = False, model: PolicyModel | None = None) -> Summary:
        m = model or self.model
        key = (top_n, shuffle, m.to_json())
        if key not in self._policy_runs:
            cfg = self.cfg.search(top_n=top_n, shuffle_each_step=shuffle)
            rep = bench(self.held_problems, ["policy"], 1, cfg, self.cfg.seed, m.scorer())
            self._policy_runs[key] = _summary(rep.rows)
        return self._policy_runs[key]

    @cached_property
    def rbfs(self) -> Summary:
        cfg = SearchConfig(node_budget=self.cfg.rbfs_budget)
        rep = self._timed("rbfs", lambda: bench(self.held_problems, ["rbfs"], self.cfg.rbfs_repeats,
                                                cfg, self.cfg.seed))
        return _repeat_mean(rep.rows, self.cfg.rbfs_repeats)

    @cached_property
    def filter(self) -> Summary:
        rep = bench(self.held_problems, ["filter"], self.cfg.filter_repeats, self.cfg.search(), self.cfg.seed)
        return _repeat_mean(rep.rows, self.cfg.filter_repeats)

    @cached_property
    def naive(self) -> Summary:
        rep = bench(self.held_problems, ["naive"], 1, self.cfg.search(), self.cfg.seed)
        return _summary(rep.rows)

    @cached_property
    def bfs_traces(self):
        cfg = SearchConfig(node_budget=self.cfg.bfs_budget)
        return self._timed("bfs", lambda: [prove_bfs(e, cfg) for _, e in self.held_problems])

    @property
    def bfs(self) -> Summary:
        rows = [{"success": t.success, "length": t.length} for t in self.bfs_traces]
        return _summary(rows)

    def bfs_misses(self, reference_lengths: list[int | None]) -> list[str]:
        """Held-out ids where another prover found a proof of length ``l``, BFS
        searched every level below ``l`` within budget and still failed."""
        bad = []
        cfg = SearchConfig(node_budget=self.cfg.bfs_budget)
        for (pid, e), t, ref in zip(self.held_problems, self.bfs_traces, reference_lengths):
            if ref is None or t.success:
                continue
            capped = prove_bfs(e, SearchConfig(max_depth=ref, node_budget=cfg.node_budget))
            if capped.reason != "node budget" and not capped.success:
                bad.append(pid)
        return bad


__all__ = ["ExperimentConfig", "Experiment", "Summary"]
