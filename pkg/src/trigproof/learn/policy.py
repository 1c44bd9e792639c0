"""Linear softmax policy over one-step-lookahead features.

Every valid action is scored by ``w . phi(s, a)`` where ``phi`` describes the
expression the action would produce. Training fits ``w`` by cross-entropy on
expert (state, action) pairs; fine-tuning is REINFORCE with a scalar baseline.
"""
from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from ..expr import COS, SIN, Expression
from ..rules import Action, InvalidAction, MAX_TERMS, PAIRS, decode, encode, moves, splice
from ..search import ProofTrace, SearchConfig, verify_trace
from .dataset import StateActionPair, to_canonical

SCHEMA_VERSION = 1

RULE_NAMES = ("Pcc", "Pcs", "Psc", "Pss", "Ac+", "Ac-", "As+", "As-")
FEATURE_NAMES = tuple(f"rule_{r}" for r in RULE_NAMES) + (
    "term_delta",
    "cancelled",
    "merged",
    "created",
    "shrinks",
    "solved",
    "result_max_degree",
    "result_total_degree",
    "action_term_degree",
    "result_phase_factors",
    "bias",
)
N_FEATURES = len(FEATURE_NAMES)


class DegenerateData(ValueError):
    pass


def _rule_index(t, j: int, k: int) -> int:
    fs = t.factors
    fj = fs[j]
    if k == -1:
        base = 6 if fj.kind == SIN else 4
        return base + (1 if fj.phase12 < 0 else 0)
    fk = fs[k]
    return {(COS, COS): 0, (COS, SIN): 1, (SIN, COS): 2, (SIN, SIN): 3}[(fk.kind, fj.kind)]


def _features(s: Expression, i: int, new_terms, label: int) -> np.ndarray:
    child = splice(s, i, new_terms)
    j, k = PAIRS[(label - 1) % len(PAIRS)]
    t = s.terms[i]
    before = {u.factors: u.coef for u in s.terms}
    after = {u.factors: u.coef for u in child.terms}
    cancelled = merged = 0
    for n, u in enumerate(s.terms):
        if n == i:
            continue
        c = after.get(u.factors)
        if c is None:
            cancelled += 1
        elif c != u.coef:
            merged += 1
    created = sum(1 for f in after if f not in before)
    v = np.zeros(N_FEATURES)
    v[_rule_index(t, j, k)] = 1.0
    v[8] = len(child.terms) - len(s.terms)
    v[9] = cancelled
    v[10] = merged
    v[11] = created
    v[12] = 1.0 if len(child.terms) <= len(s.terms) else 0.0
    v[13] = 1.0 if child.is_zero else 0.0
    v[14] = child.max_degree
    v[15] = sum(u.degree for u in child.terms) / MAX_TERMS
    v[16] = t.degree
    v[17] = sum(1 for u in child.terms for f in u.factors if f.phase12) / MAX_TERMS
    v[18] = 1.0
    return v


@lru_cache(maxsize=1 << 15)
def feature_matrix(s: Expression) -> tuple[tuple[int, ...], np.ndarray]:
    """Valid labels of ``s`` (ascending) and their feature rows."""
    ms = moves(s)
    labels = tuple(m[0] for m in ms)
    if not ms:
        return labels, np.zeros((0, N_FEATURES))
    X = np.stack([_features(s, i, nt, label) for label, i, nt in ms])
    X.setflags(write=False)
    return labels, X


def featurize(state: Expression, action) -> np.ndarray:
    """Feature vector of one valid action; raises InvalidAction otherwise."""
    label = action if isinstance(action, int) else encode(Action(*action))
    labels, X = feature_matrix(state)
    try:
        return X[labels.index(label)].copy()
    except ValueError:
        raise InvalidAction(f"action {decode(label) if 1 <= label <= 112 else label} is not valid") from None


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max()
    p = np.exp(z)
    return p / p.sum()


@dataclass
class PolicyModel:
    weights: np.ndarray
    feature_names: tuple[str, ...] = FEATURE_NAMES
    schema_version: int = SCHEMA_VERSION
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        if self.weights.shape != (len(self.feature_names),):
            raise ValueError("weights do not match the feature schema")

    @classmethod
    def zeros(cls) -> "PolicyModel":
        return cls(np.zeros(N_FEATURES))

    def scores(self, s: Expression) -> dict[int, float]:
        labels, X = feature_matrix(s)
        return dict(zip(labels, (X @ self.weights).tolist()))

    def probabilities(self, s: Expression) -> dict[int, float]:
        labels, X = feature_matrix(s)
        if not labels:
            return {}
        return dict(zip(labels, _softmax(X @ self.weights).tolist()))

    def scorer(self):
        return self.scores

    # The text form keeps floats bit-exact: json writes the shortest repr.
    def to_json(self) -> str:
        return json.dumps({
            "schema_version": self.schema_version,
            "feature_names": list(self.feature_names),
            "weights": [float(w) for w in self.weights],
            "metadata": self.metadata,
        }, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "PolicyModel":
        d = json.loads(text)
        if d.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported model schema {d.get('schema_version')}")
        if tuple(d["feature_names"]) != FEATURE_NAMES:
            raise ValueError("model feature names do not match this version")
        return cls(np.array(d["weights"], dtype=float), tuple(d["feature_names"]),
                   d["schema_version"], d.get("metadata", {}))

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_json() + "\n")

    @classmethod
    def load(cls, path) -> "PolicyModel":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read())


# ------------------------------------------------------------------ imitation


@dataclass
class FitResult:
    weights: np.ndarray
    losses: list[float]


def fit_softmax(groups: Sequence[tuple[np.ndarray, int]], epochs: int = 200, lr: float = 0.05,
                l2: float = 1e-4, batch_size: int | None = None, seed: int = 0,
                optimizer: str = "adam", init: np.ndarray | None = None) -> FitResult:
    """Minimize mean ``-log softmax(X w)[target]`` over groups ``(X, target)``.

    ``batch_size=None`` gives full-batch steps. ``optimizer`` is ``"adam"`` or
    ``"gd"``. ``losses[e]`` is the full-data objective before epoch ``e``'s updates
    and the last entry is the final objective.
    """
    if not groups:
        raise DegenerateData("no training groups")
    F = groups[0][0].shape[1]
    for X, y in groups:
        if X.shape[0] == 0:
            raise DegenerateData("a state has no valid actions")
        if not 0 <= y < X.shape[0]:
            raise DegenerateData("target outside the valid actions")
    sizes = np.array([X.shape[0] for X, _ in groups])
    starts = np.concatenate([[0], np.cumsum(sizes)[:-1]])
    X_all = np.concatenate([X for X, _ in groups])
    targets = starts + np.array([y for _, y in groups])
    gid_all = np.repeat(np.arange(len(groups)), sizes)
    w = np.zeros(F) if init is None else np.array(init, dtype=float)
    rng = np.random.default_rng(seed)
    m = np.zeros(F)
    v = np.zeros(F)
    b1, b2, eps = 0.9, 0.999, 1e-8
    step = 0

    def objective(w, rows, gstarts, tpos, ngroups, gid):
        z = X_all[rows] @ w
        zmax = np.maximum.reduceat(z, gstarts)
        ez = np.exp(z - zmax[gid])
        denom = np.add.reduceat(ez, gstarts)
        loss = float(np.sum(np.log(denom) + zmax - z[tpos]) / ngroups)
        p = ez / denom[gid]
        p[tpos] -= 1.0
        grad = X_all[rows].T @ p / ngroups
        return loss + 0.5 * l2 * float(w @ w), grad + l2 * w

    all_rows = np.arange(X_all.shape[0])
    full = (all_rows, starts, targets, len(groups), gid_all)
    losses = []
    order = np.arange(len(groups))
    for _ in range(epochs):
        losses.append(objective(w, *full)[0])
        if batch_size is None:
            batches = [full]
        else:
            rng.shuffle(order)
            batches = []
            for b in range(0, len(order), batch_size):
                sel = order[b:b + batch_size]
                rows = np.concatenate([np.arange(starts[g], starts[g] + sizes[g]) for g in sel])
                bs = np.concatenate([[0], np.cumsum(sizes[sel])[:-1]])
                tpos = bs + (targets[sel] - starts[sel])
                gid = np.repeat(np.arange(len(sel)), sizes[sel])
                batches.append((rows, bs, tpos, len(sel), gid))
        for batch in batches:
            _, g = objective(w, *batch)
            if optimizer == "gd":
                w = w - lr * g
            elif optimizer == "adam":
                step += 1
                m = b1 * m + (1 - b1) * g
                v = b2 * v + (1 - b2) * g * g
                w = w - lr * (m / (1 - b1 ** step)) / (np.sqrt(v / (1 - b2 ** step)) + eps)
            else:
                raise ValueError(f"unknown optimizer {optimizer!r}")
    losses.append(objective(w, *full)[0])
    return FitResult(w, losses)


def training_groups(pairs: Sequence[StateActionPair]) -> list[tuple[np.ndarray, int]]:
    groups = []
    for pair in pairs:
        state, label = to_canonical(pair)
        labels, X = feature_matrix(state)
        if not labels:
            raise DegenerateData(f"state without valid actions: {pair.state_text}")
        groups.append((X, labels.index(label)))
    return groups


def train_imitation(pairs: Sequence[StateActionPair], epochs: int = 100, lr: float = 0.05,
                    seed: int = 0, l2: float = 1e-4, batch_size: int | None = 256) -> PolicyModel:
    """Cross-entropy fit of the linear policy to expert pairs."""
    if not pairs:
        raise DegenerateData("no training pairs")
    fit = fit_softmax(training_groups(pairs), epochs=epochs, lr=lr, l2=l2,
                      batch_size=batch_size, seed=seed)
    meta = {"epochs": epochs, "lr": lr, "l2": l2, "seed": seed, "pairs": len(pairs),
            "final_loss": fit.losses[-1]}
    return PolicyModel(fit.weights, metadata=meta)


def top1_accuracy(model: PolicyModel, pairs: Sequence[StateActionPair]) -> float:
    hits = 0
    for pair in pairs:
        state, label = to_canonical(pair)
        sc = model.scores(state)
        best = min(sc, key=lambda lab: (-sc[lab], lab))
        hits += best == label
    return hits / len(pairs) if pairs else 0.0


# ------------------------------------------------------------------ fine-tuning


@dataclass(frozen=True)
class RLConfig:
    gamma: float = 0.99
    step_reward: float = -0.1
    terminal_reward: float = 1.0
    episodes: int = 5  # passes over the problem set
    learning_rate: float = 0.01
    max_steps: int = 40
    baseline_momentum: float = 0.9

    def __post_init__(self):
        if not 0 < self.gamma <= 1:
            raise ValueError("gamma must lie in (0, 1]")
        if self.episodes < 0 or self.max_steps < 1:
            raise ValueError("episodes must be >= 0 and max_steps >= 1")
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be >= 0")


def discounted(rewards: Sequence[float], gamma: float) -> list[float]:
    out = [0.0] * len(rewards)
    acc = 0.0
    for t in range(len(rewards) - 1, -1, -1):
        acc = rewards[t] + gamma * acc
        out[t] = acc
    return out


def episode_rewards(length: int, success: bool, cfg: RLConfig) -> list[float]:
    r = [cfg.step_reward] * length
    if success and length:
        r[-1] = cfg.terminal_reward
    return r


def compute_returns(trace: ProofTrace, cfg: RLConfig = RLConfig()) -> list[float]:
    """Discounted return at every step of a verified successful trace."""
    from .dataset import InvalidTrace

    if not verify_trace(trace):
        raise InvalidTrace("trace does not verify")
    return discounted(episode_rewards(trace.length, True, cfg), cfg.gamma)


@dataclass
class FinetuneResult:
    model: PolicyModel
    curve: list[float]  # mean initial return per pass


def _episode(w: np.ndarray, e: Expression, cfg: RLConfig, rng: random.Random):
    grads = []
    s = e
    success = s.is_zero
    while not success and len(grads) < cfg.max_steps:
        labels, X = feature_matrix(s)
        if not labels:
            break
        p = _softmax(X @ w)
        a = rng.choices(range(len(labels)), weights=p.tolist())[0]
        grads.append(X[a] - p @ X)
        _, i, nt = moves(s)[a]
        s = splice(s, i, nt)
        success = s.is_zero
    return grads, success


def reinforce_finetune(model: PolicyModel, problems: Sequence[Expression], cfg: RLConfig = RLConfig(),
                       seed: int = 0) -> FinetuneResult:
    """REINFORCE on sampled episodes with a moving-average scalar baseline."""
    if not problems:
        raise ValueError("no problems to fine-tune on")
    rng = random.Random(seed)
    w = model.weights.copy()
    baseline = None
    curve = []
    for _ in range(cfg.episodes):
        firsts = []
        for e in problems:
            grads, success = _episode(w, e, cfg, rng)
            if not grads:
                continue
            G = discounted(episode_rewards(len(grads), success, cfg), cfg.gamma)
            firsts.append(G[0])
            b = G[0] if baseline is None else baseline
            step = sum((g_t - b) * d for g_t, d in zip(G, grads)) / len(grads)
            w = w + cfg.learning_rate * step
            mean_g = sum(G) / len(G)
            baseline = mean_g if baseline is None else (
                cfg.baseline_momentum * baseline + (1 - cfg.baseline_momentum) * mean_g)
        curve.append(sum(firsts) / len(firsts) if firsts else 0.0)
    meta = dict(model.metadata)
    meta["finetune"] = {"episodes": cfg.episodes, "learning_rate": cfg.learning_rate,
                        "gamma": cfg.gamma, "seed": seed, "problems": len(problems)}
    return FinetuneResult(PolicyModel(w, model.feature_names, model.schema_version, meta), curve)


def greedy_rollout_lengths(model: PolicyModel, problems: Sequence[Expression],
                           cfg: SearchConfig = SearchConfig()) -> list[int | None]:
    from ..search import prove_policy

    out = []
    c = SearchConfig(max_depth=cfg.max_depth, max_steps=cfg.max_steps, node_budget=cfg.node_budget, top_n=1)
    for e in problems:
        t = prove_policy(e, model.scorer(), c)
        out.append(t.length if t.success else None)
    return out


def mean_return(model: PolicyModel, problems: Sequence[Expression], cfg: RLConfig = RLConfig()) -> float:
    """Mean discounted initial return of greedy top-1 rollouts."""
    vals = []
    for n in greedy_rollout_lengths(model, problems, SearchConfig(max_steps=cfg.max_steps)):
        if n is None:
            vals.append(discounted(episode_rewards(cfg.max_steps, False, cfg), cfg.gamma)[0])
        else:
            vals.append(discounted(episode_rewards(n, True, cfg), cfg.gamma)[0] if n else 0.0)
    return sum(vals) / len(vals) if vals else math.nan
