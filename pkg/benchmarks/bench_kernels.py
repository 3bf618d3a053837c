"""Compare the compiled and pure-Python Hermite-form kernels.

    python benchmarks/bench_kernels.py [--reps 200]

Also times a full-rank canonicalization workload through each backend.
"""

import argparse
import random
import timeit

from localheights import kernels


def random_case(rng, n, p, e):
    P = p**e
    cols = [[rng.randrange(P) for _ in range(n)] for _ in range(n + 2)]
    cols += [[p ** (e - 1) if i == j else 0 for i in range(n)] for j in range(n)]
    return cols, n, p, e


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--reps", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    print(f"backend selected at import: {kernels.BACKEND}")
    if kernels.BACKEND != "cython":
        print("compiled kernel unavailable; nothing to compare")
        return
    rng = random.Random(args.seed)
    print(f"{'n':>3} {'p':>3} {'e':>3} {'python us':>11} {'compiled us':>12} {'speedup':>8}")
    for n, p, e in [(2, 3, 4), (3, 2, 8), (4, 5, 6), (6, 13, 5), (8, 3, 10), (12, 2, 20)]:
        cases = [random_case(rng, n, p, e) for _ in range(args.reps)]
        for c in cases:
            assert kernels.hnf_mod_python(*c) == kernels.hnf_mod_compiled(*c)
        tp = timeit.timeit(lambda: [kernels.hnf_mod_python(*c) for c in cases], number=1)
        tc = timeit.timeit(lambda: [kernels.hnf_mod_compiled(*c) for c in cases], number=1)
        us = 1e6 / args.reps
        print(f"{n:>3} {p:>3} {e:>3} {tp * us:>11.1f} {tc * us:>12.1f} {tp / tc:>8.1f}x")
    end_to_end(rng)


def end_to_end(rng):
    """Walk half-geodesics (canonicalization-bound) with each backend."""
    from localheights.building import Subspace, class_of, half_geodesic
    from localheights.exact import RationalMatrix, ValuationContext

    ctx = ValuationContext(3)
    work = []
    for _ in range(30):
        x = RationalMatrix([[rng.randint(-9, 9) for _ in range(4)] for _ in range(4)])
        W = RationalMatrix([[rng.randint(-3, 3) for _ in range(2)] for _ in range(4)])
        try:
            work.append((class_of(x, ctx), Subspace(W)))
        except ValueError:
            pass
    run = lambda: [half_geodesic(x, W, 6) for x, W in work]
    saved = kernels._compiled
    tc = timeit.timeit(run, number=1)
    kernels._compiled = None
    try:
        tp = timeit.timeit(run, number=1)
    finally:
        kernels._compiled = saved
    print(f"half-geodesic walk (n=4, {len(work)} walks of 6 steps): python {tp:.3f}s, compiled {tc:.3f}s")


if __name__ == "__main__":
    main()
