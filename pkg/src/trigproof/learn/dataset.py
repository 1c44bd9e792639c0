"""(state, action) pairs from proofs, term-shuffle augmentation and the pairs file."""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable

from ..expr import Expression, canonicalize
from ..rules import MAX_TERMS, Action, decode, encode, is_valid
from ..search import ProofTrace, verify_trace
from ..syntax import parse_slots, slots_text, to_text

CANONICAL = "canonical"


class InvalidTrace(ValueError):
    pass


@dataclass(frozen=True)
class StateActionPair:
    state_text: str  # padded to MAX_TERMS slots
    label: int
    problem_id: str = ""
    derivation: str = CANONICAL  # or "shuffled:p0,p1,...", perm[old_slot] = new_slot

    @property
    def permutation(self) -> tuple[int, ...] | None:
        if not self.derivation.startswith("shuffled:"):
            return None
        return tuple(int(p) for p in self.derivation.split(":", 1)[1].split(","))

    def as_dict(self) -> dict:
        return {"problem_id": self.problem_id, "state": self.state_text,
                "label": self.label, "derivation": self.derivation}

    @classmethod
    def from_dict(cls, d: dict) -> "StateActionPair":
        return cls(d["state"], int(d["label"]), d.get("problem_id", ""), d.get("derivation", CANONICAL))


def extract_pairs(trace: ProofTrace, problem_id: str = "") -> list[StateActionPair]:
    """One pair per step of a verified successful trace."""
    if not trace.success or not verify_trace(trace):
        raise InvalidTrace(f"trace for {problem_id or '<unnamed>'} does not verify")
    return [StateActionPair(to_text(s, pad_to=MAX_TERMS), label, problem_id)
            for s, label in trace.steps]


def augment(pair: StateActionPair, rng, copies: int = 3) -> list[StateActionPair]:
    """``copies`` shuffles of the padded 8 slots, with the action's term index remapped."""
    if copies < 0:
        raise ValueError("copies must be >= 0")
    e, slot_map = parse_slots(pair.state_text)
    slots = [None if m is None else e.terms[m] for m in slot_map]
    slots += [None] * (MAX_TERMS - len(slots))
    a = decode(pair.label)
    out = []
    for _ in range(copies):
        order = list(range(MAX_TERMS))
        rng.shuffle(order)  # order[new] = old
        perm = [0] * MAX_TERMS
        for new, old in enumerate(order):
            perm[old] = new
        text = slots_text([slots[old] for old in order])
        label = encode(Action(perm[a.i], a.j, a.k))
        out.append(StateActionPair(text, label, pair.problem_id,
                                   "shuffled:" + ",".join(map(str, perm))))
    return out


def resolve(pair: StateActionPair) -> tuple[Expression, Action]:
    """The expression in slot order (zeros dropped) and the action re-indexed onto it."""
    e, slot_map = parse_slots(pair.state_text)
    a = decode(pair.label)
    if a.i >= len(slot_map) or slot_map[a.i] is None:
        raise InvalidTrace(f"label {pair.label} points at an empty slot")
    act = Action(slot_map[a.i], a.j, a.k)
    if not is_valid(e, act):
        raise InvalidTrace(f"label {pair.label} is not valid in its state")
    return e, act


def to_canonical(pair: StateActionPair) -> tuple[Expression, int]:
    """Canonical state and the label of the same rewrite in canonical term order."""
    e, act = resolve(pair)
    c = canonicalize(e)
    term = e.terms[act.i]
    return c, encode(Action(c.terms.index(term), act.j, act.k))


def write_pairs(path, pairs: Iterable[StateActionPair], header: dict | None = None) -> int:
    n = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if header is not None:
            fh.write(json.dumps({"header": header}, sort_keys=True) + "\n")
        for p in pairs:
            fh.write(json.dumps(p.as_dict(), sort_keys=True) + "\n")
            n += 1
    return n


def read_pairs(path) -> list[StateActionPair]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            d = json.loads(line)
            if "header" in d:
                continue
            out.append(StateActionPair.from_dict(d))
    return out
