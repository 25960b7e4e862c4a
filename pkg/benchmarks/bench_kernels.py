"""Compiled vs pure-Python kernels on the hot paths.

    python benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import random
import timeit

from dotalg import _kernels_py, kernels
from dotalg.algebraise import algebrise_hierarchical
from dotalg.evaluate import interpret_term
from dotalg.semiring import PRIME61, random_interpretation
from dotalg.testkit import SORT_DIMS, random_hierarchy

P61 = (1 << 61) - 1


def kernel_cases(rng):
    n = 48
    mod = [rng.randrange(P61) for _ in range(n * n)]
    bits = [rng.randint(0, 1) for _ in range(n * n)]
    trop = [rng.choice([-1, rng.randint(0, 99)]) for _ in range(n * n)]
    small = [rng.randrange(P61) for _ in range(64)]
    adj = [0] * 16
    for u in range(16):
        for v in range(u + 1, 16):
            if rng.random() < 0.3:
                adj[u] |= 1 << v
                adj[v] |= 1 << u
    return {
        "matmul_mod 48x48": lambda m: m.matmul_mod(mod, mod, n, n, n, P61),
        "matmul_bool 48x48": lambda m: m.matmul_bool(bits, bits, n, n, n),
        "matmul_trop 48x48": lambda m: m.matmul_trop(trop, trop, n, n, n),
        "kron_mod 8x8 (x) 8x8": lambda m: m.kron_mod(small, small, 8, 8, 8, 8, P61),
        "treewidth_dp 16 vertices": lambda m: m.treewidth_dp(16, adj),
    }


def pipeline_case():
    hs = [random_hierarchy(seed) for seed in range(40)]
    interps = [random_interpretation(PRIME61, h.base.symbols, seed=i, dims=SORT_DIMS) for i, h in enumerate(hs)]
    terms = [algebrise_hierarchical(h) for h in hs]
    return lambda: [interpret_term(t, I) for t, I in zip(terms, interps)]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if "compiled" not in kernels.available():
        raise SystemExit("compiled kernels are not built; run `pip install -e . --no-build-isolation`")
    from dotalg import _kernels as compiled

    print(f"{'case':<28} {'python ms':>10} {'compiled ms':>12} {'speedup':>8}")
    for name, fn in kernel_cases(random.Random(0)).items():
        py = min(timeit.repeat(lambda: fn(_kernels_py), number=1, repeat=args.repeat)) * 1e3
        cc = min(timeit.repeat(lambda: fn(compiled), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:<28} {py:>10.2f} {cc:>12.3f} {py / cc:>7.1f}x")

    run = pipeline_case()
    times = {}
    for backend in ("python", "compiled"):
        kernels.use(backend)
        times[backend] = min(timeit.repeat(run, number=1, repeat=args.repeat)) * 1e3
    print(f"{'40 hierarchies, prime field':<28} {times['python']:>10.2f} {times['compiled']:>12.3f} "
          f"{times['python'] / times['compiled']:>7.1f}x")


if __name__ == "__main__":
    main()
