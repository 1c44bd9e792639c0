"""Command-line interface: ``trigproof <subcommand> ...``.

Every output file is line-delimited JSON whose first line is a header record
``{"header": {...}}`` holding the tool version, subcommand, effective config
and seed. Exit codes: 0 success, 1 usage, 2 I/O, 3 verification failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import random
import statistics
import sys
from fractions import Fraction
from multiprocessing import Pool
from typing import Sequence

from . import __version__
from .expr import UnfoldableConstant, ZERO_EXPR, substitute_linear
from .gen import GeneratorConfig, generate_corpus
from .search import (
    METHODS,
    ProofTrace,
    SearchConfig,
    bench,
    derive_seed,
    run_method,
    summarize,
    verify_trace,
)
from .syntax import ParseError, parse, to_text

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_VERIFY = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


# ------------------------------------------------------------------ config


def _read_config_file(path) -> dict[str, str]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{n}: expected key=value")
            k, v = line.split("=", 1)
            out[k.strip()] = v.strip()
    return out


def _coerce(value: str, current):
    if isinstance(current, bool):
        if value.lower() in ("1", "true", "yes"):
            return True
        if value.lower() in ("0", "false", "no"):
            return False
        raise UsageError(f"not a boolean: {value!r}")
    if isinstance(current, int):
        return int(value)
    if isinstance(current, float):
        return float(value)
    if isinstance(current, tuple):
        items = [v.strip() for v in value.split(",") if v.strip()]
        if current and isinstance(current[0], Fraction):
            return tuple(Fraction(v) for v in items)
        return tuple(int(v) for v in items)
    return value


def _apply(cls, overrides: dict[str, str], explicit: dict):
    """Instance of dataclass ``cls`` from defaults, then ``overrides`` (strings), then ``explicit``."""
    base = cls()
    kw = {}
    for f in dataclasses.fields(cls):
        if f.name in overrides:
            kw[f.name] = _coerce(overrides[f.name], getattr(base, f.name))
        if explicit.get(f.name) is not None:
            kw[f.name] = explicit[f.name]
    try:
        return cls(**kw)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def _jsonable(obj):
    if dataclasses.is_dataclass(obj):
        return {k: _jsonable(v) for k, v in dataclasses.asdict(obj).items()}
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Fraction):
        return str(obj)
    return obj


def _header(args, config: dict) -> dict:
    return {"tool": "trigproof", "version": __version__, "subcommand": args.command,
            "seed": getattr(args, "seed", None), "config": _jsonable(config)}


def _write_lines(path, header: dict, records) -> int:
    n = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps({"header": header}, sort_keys=True) + "\n")
        for r in records:
            fh.write(json.dumps(r, sort_keys=True) + "\n")
            n += 1
    return n


def _read_records(path) -> list[tuple[int, dict | str]]:
    """(line number, record) for every non-header line. Plain text lines are returned as str."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("{"):
                rec = json.loads(line)
                if "header" in rec:
                    continue
                out.append((n, rec))
            else:
                out.append((n, line))
    return out


def read_problems(path) -> list[tuple[str, object]]:
    """(problem id, Expression) for each parseable line; bad lines are reported and skipped."""
    problems = []
    for n, rec in _read_records(path):
        text = rec if isinstance(rec, str) else rec.get("expr")
        pid = f"line{n}" if isinstance(rec, str) else str(rec.get("id", f"line{n}"))
        try:
            if text is None:
                raise ParseError("record has no expr field", "", 0)
            problems.append((pid, parse(text)))
        except (ParseError, UnfoldableConstant) as exc:
            print(f"{path}:{n}: skipped: {exc}", file=sys.stderr)
    return problems


def trace_record(pid: str, trace: ProofTrace, seed: int) -> dict:
    return {
        "problem_id": pid,
        "method": trace.method,
        "seed": seed,
        "success": trace.success,
        "length": trace.length if trace.success else None,
        "wall_time_s": trace.wall_time,
        "steps": [{"state": to_text(s), "action": a} for s, a in trace.steps],
    }


def trace_from_record(rec: dict) -> ProofTrace:
    steps = [(parse(st["state"]), int(st["action"])) for st in rec["steps"]]
    terminal = ZERO_EXPR if rec.get("success") else (steps[-1][0] if steps else ZERO_EXPR)
    return ProofTrace(steps, terminal, float(rec.get("wall_time_s", 0.0)), rec.get("method", ""))


# ------------------------------------------------------------------ T2


def parse_coef_map(text: str) -> tuple[int, Fraction] | str:
    if text == "random":
        return "random"
    try:
        a, b = text.split(",")
        return int(a), Fraction(b.strip())
    except ValueError:
        raise UsageError(f"--coef-map expects 'a,b' (b a multiple of pi) or 'random', got {text!r}") from None


def apply_coef_map(problems, spec, seed: int):
    """Substitute x -> a*x + b in every problem. Returns (mapped problems, skipped count)."""
    if spec is None:
        return problems, 0
    out, skipped = [], 0
    for pid, e in problems:
        if spec == "random":
            rng = random.Random(derive_seed(seed, "coef-map", pid))
            a, b = rng.randint(1, 360), Fraction(rng.randrange(24), 12)
        else:
            a, b = spec
        try:
            out.append((pid, substitute_linear(e, a, b)))
        except (UnfoldableConstant, ValueError):
            skipped += 1
    return out, skipped


# ------------------------------------------------------------------ commands


def _overrides(args) -> dict[str, str]:
    return _read_config_file(args.config) if getattr(args, "config", None) else {}


def _search_config(args, over) -> SearchConfig:
    explicit = {
        "max_depth": args.max_depth, "max_steps": args.max_steps, "node_budget": args.node_budget,
        "rbfs_branches": args.rbfs_branches, "top_n": getattr(args, "top_n", None),
        "shuffle_each_step": True if getattr(args, "shuffle_each_step", False) else None,
        "restart_mode": True if getattr(args, "restart_mode", False) else None,
    }
    return _apply(SearchConfig, over, explicit)


def cmd_gen(args) -> int:
    if args.count < 1:
        raise UsageError("--count must be >= 1")
    cfg = _apply(GeneratorConfig, _overrides(args), {})
    corpus = generate_corpus(args.count, args.seed, cfg)
    recs = ({"id": r.id, "seed": r.seed, "expr": to_text(r.identity), "n_terms": len(r.identity)}
            for r in corpus)
    n = _write_lines(args.out, _header(args, {"generator": cfg, "count": args.count}), recs)
    print(f"wrote {n} identities to {args.out}")
    return EXIT_OK


def _prove_one(job):
    method, pid, e, cfg, seed, model_path = job
    scorer = None
    if model_path:
        from .learn.policy import PolicyModel

        scorer = _MODEL_CACHE.get(model_path)
        if scorer is None:
            scorer = _MODEL_CACHE[model_path] = PolicyModel.load(model_path).scorer()
    t = run_method(method, e, cfg, seed, scorer)
    ok = verify_trace(t) if t.success else True
    return pid, t, seed, ok


_MODEL_CACHE: dict = {}


def _map(jobs, workers: int):
    if workers <= 1:
        return [_prove_one(j) for j in jobs]
    with Pool(workers) as pool:
        return pool.map(_prove_one, jobs, chunksize=1)


def cmd_prove(args) -> int:
    if args.method not in METHODS:
        raise UsageError(f"unknown method {args.method!r}")
    over = _overrides(args)
    cfg = _search_config(args, over)
    if args.method == "policy" and not args.model:
        raise UsageError("the policy method requires --model")
    problems = read_problems(args.input)
    if not problems:
        raise UsageError(f"no problems in {args.input}")
    problems, skipped = apply_coef_map(problems, parse_coef_map(args.coef_map) if args.coef_map else None,
                                       args.seed)
    if skipped:
        print(f"coef-map skipped {skipped} identities", file=sys.stderr)
    jobs = []
    for pid, e in problems:
        for r in range(args.repeats):
            seed = derive_seed(args.seed, args.method, pid, r)
            jobs.append((args.method, pid, e, cfg, seed, args.model if args.method == "policy" else None))
    results = _map(jobs, args.workers)
    bad = [pid for pid, _t, _s, ok in results if not ok]
    header = _header(args, {"search": cfg, "method": args.method, "repeats": args.repeats,
                            "coef_map": args.coef_map, "model": args.model, "skipped": skipped})
    _write_lines(args.out, header, (trace_record(pid, t, s) for pid, t, s, ok in results if ok))
    solved = sum(t.success for _pid, t, _s, _ok in results)
    print(f"{args.method}: {solved}/{len(results)} proved; traces in {args.out}")
    if bad:
        print(f"verification failed for: {', '.join(bad)}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_dataset(args) -> int:
    from .learn.dataset import InvalidTrace, augment, extract_pairs, write_pairs

    if args.augment < 0:
        raise UsageError("--augment must be >= 0")
    recs = [r for _n, r in _read_records(args.input) if isinstance(r, dict)]
    if not recs:
        raise UsageError(f"no proofs in {args.input}")
    rng = random.Random(args.seed)
    pairs = []
    for rec in recs:
        if not rec.get("success"):
            continue
        try:
            base = extract_pairs(trace_from_record(rec), rec.get("problem_id", ""))
        except (InvalidTrace, ParseError) as exc:
            print(f"invalid trace for {rec.get('problem_id')}: {exc}", file=sys.stderr)
            return EXIT_VERIFY
        for p in base:
            pairs.append(p)
            pairs.extend(augment(p, rng, args.augment))
    n = write_pairs(args.out, pairs, _header(args, {"augment": args.augment}))
    print(f"wrote {n} pairs to {args.out}")
    return EXIT_OK


def cmd_train(args) -> int:
    from .learn.dataset import read_pairs
    from .learn.policy import train_imitation

    pairs = read_pairs(args.input)
    if not pairs:
        raise UsageError(f"no pairs in {args.input}")
    model = train_imitation(pairs, epochs=args.epochs, lr=args.lr, seed=args.seed, l2=args.l2)
    model.metadata["source"] = str(args.input)
    model.save(args.out)
    print(f"trained on {len(pairs)} pairs, final loss {model.metadata['final_loss']:.4f}; model in {args.out}")
    return EXIT_OK


def cmd_finetune(args) -> int:
    from .learn.policy import PolicyModel, RLConfig, reinforce_finetune

    model = PolicyModel.load(args.model)
    problems = [e for _pid, e in read_problems(args.input)]
    if not problems:
        raise UsageError(f"no problems in {args.input}")
    cfg = _apply(RLConfig, _overrides(args), {"learning_rate": args.lr, "episodes": args.episodes,
                                              "gamma": args.gamma})
    res = reinforce_finetune(model, problems, cfg, args.seed)
    res.model.metadata["finetune"]["curve"] = res.curve
    res.model.save(args.out)
    print("mean return per pass: " + ", ".join(f"{c:.4f}" for c in res.curve))
    return EXIT_OK


def cmd_verify_theory(args) -> int:
    from .fixtures import golden
    from .learn.theory import expected_rbfs_length, rank_frequencies, rank_probability
    from .search import prove_rbfs

    if args.n < 3:
        raise UsageError("--n must be >= 3")
    rng = random.Random(args.seed)
    freqs = rank_frequencies(args.n, args.trials, rng)
    worst = 0.0
    print(f"rank  exact       monte-carlo  (n={args.n}, trials={args.trials})")
    for i in range(1, args.n + 1):
        p = rank_probability(args.n, i)
        worst = max(worst, abs(float(p) - freqs[i - 1]))
        print(f"{i:4d}  {str(p):10s}  {freqs[i - 1]:.5f}")
    ok = worst < args.tolerance
    print(f"max abs deviation {worst:.5f} ({'ok' if ok else 'FAIL'})")
    cfg = SearchConfig(max_depth=args.depth)
    for name in args.fixtures:
        e = golden(name)
        dp = expected_rbfs_length(e, args.depth)
        lengths = []
        for r in range(args.runs):
            t = prove_rbfs(e, random.Random(derive_seed(args.seed, name, r)), cfg)
            if t.success:
                lengths.append(t.length)
        mean = statistics.fmean(lengths)
        se = statistics.stdev(lengths) / len(lengths) ** 0.5 if len(lengths) > 1 else 0.0
        target = dp.value if dp.value != float("inf") else dp.given_success
        good = abs(target - mean) <= 3 * se if se > 0 else abs(target - mean) < 1e-12
        ok &= good
        print(f"{name}: expected length {target:.4f}, simulated {mean:.4f} +- {se:.4f} "
              f"({'ok' if good else 'FAIL'})")
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_bench(args) -> int:
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    unknown = [m for m in methods if m not in METHODS]
    if unknown or not methods:
        raise UsageError(f"unknown method(s): {', '.join(unknown) or '(none)'}")
    if "policy" in methods and not args.model:
        raise UsageError("the policy method requires --model")
    over = _overrides(args)
    cfg = _search_config(args, over)
    problems = read_problems(args.input)
    if not problems:
        raise UsageError(f"no problems in {args.input}")
    problems, skipped = apply_coef_map(problems, parse_coef_map(args.coef_map) if args.coef_map else None,
                                       args.seed)
    scorer = None
    if "policy" in methods:
        from .learn.policy import PolicyModel

        scorer = PolicyModel.load(args.model).scorer()
    report = bench(problems, methods, args.repeats, cfg, args.seed, scorer)
    header = _header(args, {"search": cfg, "methods": methods, "repeats": args.repeats,
                            "coef_map": args.coef_map, "model": args.model, "skipped": skipped})
    recs = [{"method": m, **report.methods[m].as_dict()} for m in methods]
    recs += [{"row": row} for row in report.rows]
    _write_lines(args.report, header, recs)
    print(report.table())
    return EXIT_OK


# ------------------------------------------------------------------ parser


def _search_flags(p):
    p.add_argument("--max-depth", type=int)
    p.add_argument("--max-steps", type=int)
    p.add_argument("--node-budget", type=int)
    p.add_argument("--rbfs-branches", type=int)
    p.add_argument("--top-n", type=int)
    p.add_argument("--shuffle-each-step", action="store_true", help="shuffle terms after every step")
    p.add_argument("--restart-mode", action="store_true", help="top-N as independent greedy restarts")
    p.add_argument("--coef-map", help="substitute x -> a*x + b*pi: 'a,b' or 'random'")
    p.add_argument("--model", help="policy model file")
    p.add_argument("--config", help="key=value overrides file")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="trigproof", description="Generate and prove trigonometric identities.")
    ap.add_argument("--version", action="version", version=f"trigproof {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="generate an identity corpus")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("prove", help="prove every identity in a corpus")
    p.add_argument("--method", required=True, choices=sorted(METHODS))
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--workers", type=int, default=1)
    _search_flags(p)
    p.set_defaults(func=cmd_prove)

    p = sub.add_parser("dataset", help="extract (state, action) pairs from proofs")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--augment", type=int, default=3, help="extra shuffled copies per pair")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_dataset)

    p = sub.add_parser("train", help="fit the imitation policy")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--lr", type=float, default=0.05)
    p.add_argument("--l2", type=float, default=1e-4)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("finetune", help="REINFORCE fine-tuning of a policy")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--lr", type=float)
    p.add_argument("--episodes", type=int)
    p.add_argument("--gamma", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config")
    p.set_defaults(func=cmd_finetune)

    p = sub.add_parser("verify-theory", help="check rank probabilities and expected rBFS length")
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--tolerance", type=float, default=0.01)
    p.add_argument("--fixtures", nargs="*", default=["one_step"])
    p.add_argument("--depth", type=int, default=4)
    p.add_argument("--runs", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify_theory)

    p = sub.add_parser("bench", help="pass rate, average length and time per method")
    p.add_argument("--methods", required=True, help="comma-separated, e.g. bfs,rbfs,filter")
    p.add_argument("--input", required=True)
    p.add_argument("--report", required=True)
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    _search_flags(p)
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "repeats", 1) < 1:
        print("trigproof: error: --repeats must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"trigproof: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"trigproof: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (OSError, json.JSONDecodeError) as exc:
        print(f"trigproof: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    raise SystemExit(main())
