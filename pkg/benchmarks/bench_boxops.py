#!/usr/bin/env python3
"""Benchmark the compiled box kernels against the numpy fallback.

The kernels are the hot loops of the dataset builders (all-pairs IoU per
image) and the feature provider (point containment per training example).

    python3 benchmarks/bench_boxops.py [--images 2000] [--proposals 100]
"""

from __future__ import annotations

import argparse
import random
import time

import numpy as np

from pointqa.boxops import _kernels_py

try:
    from pointqa.boxops import _kernels_cy
except ImportError:
    _kernels_cy = None


def random_boxes(rng: random.Random, n: int) -> np.ndarray:
    return np.array(
        [
            [rng.randrange(0, 500), rng.randrange(0, 500), rng.randrange(4, 120), rng.randrange(4, 120)]
            for _ in range(n)
        ],
        dtype=np.float64,
    )


def bench(label: str, fn, repeat: int = 3) -> float:
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    print(f"  {label:<14} {best * 1000:9.1f} ms")
    return best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--images", type=int, default=2000, help="simulated image count")
    parser.add_argument("--objects", type=int, default=35, help="objects per image (pair search)")
    parser.add_argument("--proposals", type=int, default=100, help="proposals per image (containment)")
    parser.add_argument("--points", type=int, default=20000, help="containment queries")
    args = parser.parse_args()

    rng = random.Random(0)
    backends = [("python", _kernels_py)]
    if _kernels_cy is not None:
        backends.append(("cython", _kernels_cy))
    else:
        print("compiled backend not built (run: python3 setup.py build_ext --inplace)")

    per_image = [random_boxes(rng, args.objects) for _ in range(args.images)]
    print(f"pairwise IoU over {args.images} images x {args.objects} objects:")
    times = {}
    for name, kernels in backends:
        times[name] = bench(name, lambda k=kernels: [k.iou_matrix(b, b) for b in per_image])

    proposal_sets = [random_boxes(rng, args.proposals) for _ in range(50)]
    queries = [
        (rng.randrange(50), float(rng.randrange(0, 600)), float(rng.randrange(0, 600)))
        for _ in range(args.points)
    ]
    print(f"point containment over {args.points} queries x {args.proposals} proposals:")
    for name, kernels in backends:
        bench(
            name,
            lambda k=kernels: [k.contains_mask(proposal_sets[i], x, y) for i, x, y in queries],
        )

    dedup_sets = [random_boxes(rng, args.objects) for _ in range(500)]
    print(f"greedy dedup over 500 images x {args.objects} boxes:")
    for name, kernels in backends:
        bench(name, lambda k=kernels: [k.greedy_dedup_mask(b, 0.5) for b in dedup_sets])

    if _kernels_cy is not None and "python" in times and "cython" in times:
        print(f"\npairwise IoU speedup: {times['python'] / times['cython']:.1f}x")


if __name__ == "__main__":
    main()
