"""Compare the pure-Python and compiled counting kernels on the family.

    python benchmarks/bench_kernels.py --nmax 14 --repeat 3
"""

from __future__ import annotations

import argparse
import time

from skelmad import kernel, lsc
from skelmad.syntax import to_store
from skelmad.terms import Term


def best_of(flat, variant, backend, repeat):
    best = None
    for _ in range(repeat):
        start = time.perf_counter()
        res = kernel.run_fast(flat, variant, backend=backend)
        took = time.perf_counter() - start
        best = took if best is None else min(best, took)
    return best, res.stats


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nmin", type=int, default=6)
    ap.add_argument("--nmax", type=int, default=14)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = kernel.available_backends()
    if "cython" not in backends:
        print("compiled kernel not built; only the pure-Python one is timed")
    print(f"{'n':>3} {'machine':>7} {'transitions':>12} " + " ".join(f"{b + ' ms':>12}" for b in backends) + f" {'speedup':>8}")
    for n in range(args.nmin, args.nmax + 1):
        store, root = to_store(lsc.family_term(n))
        flat = kernel.flatten(Term(store, root))
        for variant in ("SMAD", "MAD"):
            times = {}
            counts = set()
            for b in backends:
                t, stats = best_of(flat, variant, b, args.repeat)
                times[b] = t
                counts.add(tuple(sorted(stats.counts.items())))
            assert len(counts) == 1, "backends disagree"
            total = sum(dict(next(iter(counts))).values())
            speed = times["python"] / times["cython"] if "cython" in times else 1.0
            cols = " ".join(f"{times[b] * 1e3:12.2f}" for b in backends)
            print(f"{n:>3} {variant:>7} {total:>12} {cols} {speed:8.1f}")


if __name__ == "__main__":
    main()
