"""Wall-clock of the inference pipeline on f_n at fixed treewidth, against
brute-force enumeration of the unfolded program.

    python benchmarks/bench_pipeline.py [--max-n 12] [--brute-max 16]
"""

import argparse
import time
from pathlib import Path

from dotalg.algebraise import pipeline_stats
from dotalg.diagrams import unfold
from dotalg.frontend import load_program
from dotalg.inference import infer
from dotalg.oracle import oracle_semantics
from dotalg.semiring import substochastic


def family(n: int) -> str:
    lines = ["f_0() := let x = flip(0.5); let y = flip(0.5); x && y"]
    for i in range(1, n + 1):
        lines.append(f"f_{i}() := let x = f_{i - 1}(); let y = f_{i - 1}(); x && y")
    return "\n".join(lines)


def timed(fn):
    start = time.perf_counter()
    value = fn()
    return value, time.perf_counter() - start


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--max-n", type=int, default=12)
    parser.add_argument("--brute-max", type=int, default=16, help="largest unfolded variable count to enumerate")
    args = parser.parse_args()
    text = family(args.max_n)
    print(f"{'n':>3} {'k':>3} {'dag':>6} {'infer ms':>10} {'unfolded vars':>14} {'brute ms':>10}")
    for n in range(args.max_n + 1):
        h = load_program(text, f"f_{n}")
        stats = pipeline_stats(h)
        _, t_infer = timed(lambda: infer(h, 30))
        size = 2 ** (n + 2) - 1  # 3 per copy of f_0 plus one per conjunction above it
        brute = "-"
        if size <= args.brute_max:
            _, t = timed(lambda: oracle_semantics(unfold(h), substochastic()))
            brute = f"{t * 1e3:.1f}"
        print(f"{n:>3} {stats.k:>3} {stats.term_dag_size:>6} {t_infer * 1e3:>10.1f} {size:>14} {brute:>10}")


if __name__ == "__main__":
    main()
