"""Compare the expected-length recursion, the survival model and rBFS simulation.

    python scripts/check_theory.py --depth 4 --runs 10000
"""
import argparse
import math
import random
import statistics

from trigproof.fixtures import THEORY_INSTANCES, golden
from trigproof.learn.theory import expected_rbfs_length, rbfs_length_survival, survival_summary
from trigproof.search import SearchConfig, prove_rbfs


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--depth", type=int, default=4)
    ap.add_argument("--runs", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    cfg = SearchConfig(max_depth=args.depth)
    print(f"{'instance':<12}{'recursion':>10}{'survival':>10}{'simulated':>11}{'se':>8}{'P(success)':>12}")
    for name in THEORY_INSTANCES:
        e = golden(name)
        dp = expected_rbfs_length(e, args.depth)
        target = dp.value if dp.value != math.inf else dp.given_success
        p, surv_mean = survival_summary(rbfs_length_survival(e, args.depth))
        rng = random.Random(args.seed)
        lengths = [t.length for t in (prove_rbfs(e, rng, cfg) for _ in range(args.runs)) if t.success]
        mean = statistics.fmean(lengths)
        se = statistics.stdev(lengths) / math.sqrt(len(lengths))
        print(f"{name:<12}{target:>10.4f}{surv_mean:>10.4f}{mean:>11.4f}{se:>8.4f}"
              f"{len(lengths) / args.runs:>12.3f}")


if __name__ == "__main__":
    main()
