"""Compare the compiled kernels with the pure-numpy fallback.

Usage: python benchmarks/bench_kernels.py [--seed N] [--problems K] [--repeat R]

Prints per-call kernel timings for a few problem sizes and the wall time of
full solves on small random LPs with each backend.
"""

import argparse
import json

from mmlp import bench


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--problems", type=int, default=20)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    report = bench.run(seed=args.seed, problems=args.problems, repeat=args.repeat)

    print(f"backends: {', '.join(report['backends'])}")
    print(f"{'m':>4} {'n':>4}" + "".join(f"{b + ' us':>14}" for b in report["backends"]))
    for row in report["kernels"]:
        cells = "".join(f"{row[b + '_us']:>14.2f}" for b in report["backends"])
        print(f"{row['m']:>4} {row['n']:>4}{cells}")
    print(json.dumps(report["solve"]))
    if "solve_speedup" in report:
        print(f"full-solve speedup: {report['solve_speedup']:.2f}x")


if __name__ == "__main__":
    main()
