"""Run the corpus experiment and print a results table.

    python scripts/run_experiment.py --corpus-size 1000 --held-out 200 --out results.json
"""
import argparse
import json
import logging
import time

from trigproof.experiment import Experiment, ExperimentConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--corpus-size", type=int, default=1000)
    ap.add_argument("--held-out", type=int, default=200)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--out", help="write the results as JSON")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    ex = Experiment(ExperimentConfig(corpus_size=args.corpus_size, held_out=args.held_out, seed=args.seed))
    t0 = time.perf_counter()
    results = {"pairs": len(ex.pairs), "final_loss": ex.model.metadata["final_loss"]}
    rows = {
        "naive": ex.naive,
        "filter": ex.filter,
        "bfs": ex.bfs,
        "rbfs": ex.rbfs,
        "policy top-1": ex.policy(1),
        "policy top-3": ex.policy(3),
        "policy top-5": ex.policy(5),
        "policy top-1 shuffled": ex.policy(1, shuffle=True),
        "finetuned top-1": ex.policy(1, model=ex.finetuned.model),
    }
    print(f"{'method':<24}{'pass rate':>10}{'length':>9}")
    for name, s in rows.items():
        print(f"{name:<24}{s.pass_rate:>10.3f}{s.avg_length:>9.3f}")
    results["methods"] = {k: v.as_dict() for k, v in rows.items()}
    results["finetune_curve"] = ex.finetuned.curve
    results["timings"] = dict(ex.timings, total=time.perf_counter() - t0)
    print(json.dumps(results["timings"], indent=1))
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(results, fh, indent=1, sort_keys=True)


if __name__ == "__main__":
    main()
