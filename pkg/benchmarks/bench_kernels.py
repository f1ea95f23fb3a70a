#!/usr/bin/env python3
"""Benchmark the compiled kernel extension against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--n 20000] [--dim 384] [--queries 50]

Covers the two hot paths: the exact cosine scan behind store.search and the
pairwise greedy-match behind bert_score. Also asserts the backends agree
bit-for-bit on the benchmark inputs.
"""

import argparse
import random
import time
from array import array

from threatrag.kernels import _pykernels

try:
    from threatrag.kernels import _ckernels
except ImportError:
    _ckernels = None


def timed(fn, repeats=3):
    best = float("inf")
    result = None
    for _ in range(repeats):
        start = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - start)
    return best, result


def bench_scan(impl, flat, n, dim, queries):
    def run():
        out = None
        for q in queries:
            out = impl.cosine_scores(flat, n, dim, q)
        return out
    return run


def bench_bertscore(impl, cand, nc, ref, nr, dim, rounds):
    def run():
        out = None
        for _ in range(rounds):
            out = impl.bertscore_pr(cand, nc, ref, nr, dim)
        return out
    return run


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--n", type=int, default=20000, help="records in the scan")
    parser.add_argument("--dim", type=int, default=384)
    parser.add_argument("--queries", type=int, default=50)
    parser.add_argument("--tokens", type=int, default=64, help="tokens per side in greedy match")
    parser.add_argument("--rounds", type=int, default=200, help="greedy-match repetitions")
    args = parser.parse_args()

    rng = random.Random(0)
    flat = array("d", (rng.uniform(-1, 1) for _ in range(args.n * args.dim)))
    queries = [array("d", (rng.uniform(-1, 1) for _ in range(args.dim)))
               for _ in range(args.queries)]
    cand = array("d", (rng.uniform(-1, 1) for _ in range(args.tokens * args.dim)))
    ref = array("d", (rng.uniform(-1, 1) for _ in range(args.tokens * args.dim)))

    rows = []
    py_scan, py_scan_out = timed(bench_scan(_pykernels, flat, args.n, args.dim, queries))
    rows.append(("cosine scan", "python", py_scan, None))
    py_bs, py_bs_out = timed(bench_bertscore(_pykernels, cand, args.tokens,
                                             ref, args.tokens, args.dim, args.rounds))
    rows.append(("greedy match", "python", py_bs, None))

    if _ckernels is not None:
        c_scan, c_scan_out = timed(bench_scan(_ckernels, flat, args.n, args.dim, queries))
        assert list(c_scan_out) == list(py_scan_out), "backends disagree on scan scores"
        rows.append(("cosine scan", "c", c_scan, py_scan / c_scan))
        c_bs, c_bs_out = timed(bench_bertscore(_ckernels, cand, args.tokens,
                                               ref, args.tokens, args.dim, args.rounds))
        assert c_bs_out == py_bs_out, "backends disagree on greedy-match P/R"
        rows.append(("greedy match", "c", c_bs, py_bs / c_bs))
    else:
        print("compiled extension not built; benchmarking the fallback only")

    scan_work = args.n * args.queries
    match_work = args.tokens * args.tokens * args.rounds
    print(f"\nscan: {args.n} records x dim {args.dim} x {args.queries} queries "
          f"({scan_work} cosines); greedy match: {args.tokens}x{args.tokens} "
          f"tokens x dim {args.dim} x {args.rounds} rounds")
    print(f"{'kernel':<14}{'backend':<10}{'best (s)':<12}{'speedup':<8}")
    for name, backend, seconds, speedup in rows:
        extra = f"{speedup:.1f}x" if speedup else "-"
        print(f"{name:<14}{backend:<10}{seconds:<12.4f}{extra:<8}")


if __name__ == "__main__":
    main()
