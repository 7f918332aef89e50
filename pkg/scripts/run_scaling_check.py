#!/usr/bin/env python3
"""Measure per-sweep wall time as the graph grows (should stay ~linear)."""

import argparse
import time

import numpy as np

from pccgraph import PccConfig, build_knn_graph, gen_blobs, sample_labeled_mask
from pccgraph.engine import pcc_init, pcc_sweep


def per_sweep_seconds(n, k, fraction, sweeps, repeats):
    ds = gen_blobs(n, 2, dim=2, separation=6.0, sigma=1.0, seed=1)
    g = build_knn_graph(ds.features, k)
    mask = sample_labeled_mask(ds.labels, fraction, 7, num_classes=2)
    given = np.where(mask, ds.labels, -1)
    config = PccConfig(seed=5)
    best = float("inf")
    for _ in range(repeats):
        state = pcc_init(g, given, config, num_classes=2)
        rng = np.random.default_rng(config.seed)
        pcc_sweep(state, rng)  # warm-up
        t0 = time.perf_counter()
        for _ in range(sweeps):
            pcc_sweep(state, rng)
        best = min(best, (time.perf_counter() - t0) / sweeps)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", type=int, nargs="+", default=[2000, 4000, 8000])
    parser.add_argument("--k", type=int, default=5)
    parser.add_argument("--fraction", type=float, default=0.1)
    parser.add_argument("--sweeps", type=int, default=60)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    previous = None
    for n in args.sizes:
        t = per_sweep_seconds(n, args.k, args.fraction, args.sweeps, args.repeats)
        ratio = "" if previous is None else f"  ratio vs previous: {t / previous:.2f}"
        print(f"n={n:<7} per-sweep: {t * 1e6:8.1f} us{ratio}")
        previous = t


if __name__ == "__main__":
    main()
