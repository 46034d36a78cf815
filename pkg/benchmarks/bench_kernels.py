#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

Runs each kernel pair on identical inputs and prints wall times plus the
speedup.  The two implementations are also checked for byte-identical
results while we are at it, so a benchmark run doubles as a parity
smoke test.

    python3 benchmarks/bench_kernels.py            # default sizes
    python3 benchmarks/bench_kernels.py --examples 2000000
"""

import argparse
import random
import time
from array import array

from labelbalance._kernels import _pykernels

try:
    from labelbalance._kernels import _ckernels
except ImportError:
    _ckernels = None


def build_dataset(n_examples, n_classes, seed=0):
    rng = random.Random(seed)
    flat = array("i")
    offsets = array("q", [0])
    for j in range(n_examples):
        count = 1 + (j % 3)
        labs = rng.sample(range(n_classes), count)
        flat.extend(sorted(labs))
        offsets.append(len(flat))
    priors = array("d", [rng.uniform(1e-4, 0.5) for _ in range(n_classes)])
    return flat, offsets, priors


def build_eval(n_rows, seed=1):
    rng = random.Random(seed)
    scores = array("d", (rng.random() for _ in range(n_rows)))
    pos = bytearray(n_rows)
    for r in rng.sample(range(n_rows), max(1, n_rows // 20)):
        pos[r] = 1
    return scores, pos


def timed(fn, *args):
    t0 = time.perf_counter()
    out = fn(*args)
    return time.perf_counter() - t0, out


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--examples", type=int, default=500_000)
    parser.add_argument("--classes", type=int, default=527)
    parser.add_argument("--eval-rows", type=int, default=20_000)
    args = parser.parse_args()

    if _ckernels is None:
        print("compiled kernels not built; nothing to compare")
        return 1

    flat, offsets, priors = build_dataset(args.examples, args.classes)
    scores, pos = build_eval(args.eval_rows)

    print(f"dataset: {args.examples} examples, {args.classes} classes, "
          f"{len(flat)} labels; eval column: {args.eval_rows} rows")
    print(f"{'kernel':<22}{'compiled':>12}{'pure':>12}{'speedup':>10}")

    cases = []

    cases.append(("count_labels",
                  (_ckernels.count_labels, flat, args.classes),
                  (_pykernels.count_labels, flat, args.classes)))

    wc, _ = _ckernels.example_weights(flat, offsets, priors, 0.5)
    cases.append(("example_weights",
                  (_ckernels.example_weights, flat, offsets, priors, 0.5),
                  (_pykernels.example_weights, flat, offsets, priors, 0.5)))

    wmin = min(wc)
    cases.append(("round_factors",
                  (_ckernels.round_factors, wc, wmin),
                  (_pykernels.round_factors, wc, wmin)))

    factors = _ckernels.round_factors(wc, wmin)
    cases.append(("weighted_counts",
                  (_ckernels.weighted_counts, flat, offsets, factors,
                   args.classes),
                  (_pykernels.weighted_counts, flat, offsets, factors,
                   args.classes)))

    total = sum(factors)
    cases.append(("expand_indices",
                  (_ckernels.expand_indices, factors, total),
                  (_pykernels.expand_indices, factors, total)))

    idx_c = _ckernels.expand_indices(factors, total)
    idx_p = _pykernels.expand_indices(factors, total)
    cases.append(("shuffle_in_place",
                  (_ckernels.shuffle_in_place, idx_c, 42),
                  (_pykernels.shuffle_in_place, idx_p, 42)))

    cases.append(("rank_metrics",
                  (_ckernels.rank_metrics, scores, pos, 0),
                  (_pykernels.rank_metrics, scores, pos, 0)))

    mismatches = 0
    for name, (cfn, *cargs), (pfn, *pargs) in cases:
        ct, cout = timed(cfn, *cargs)
        pt, pout = timed(pfn, *pargs)
        if name == "shuffle_in_place":
            same = idx_c == idx_p
        else:
            same = cout == pout
        if not same:
            mismatches += 1
        flag = "" if same else "  RESULTS DIFFER"
        print(f"{name:<22}{ct:>10.4f}s{pt:>10.4f}s{pt / ct:>9.1f}x{flag}")

    if mismatches:
        print(f"{mismatches} kernel(s) disagreed between implementations")
        return 1
    print("all kernel results identical across implementations")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
