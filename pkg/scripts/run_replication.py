#!/usr/bin/env python3
"""Full replication protocol on real extracted features.

Takes a fully labeled Feature CSV (e.g. from the extractor package), runs the
(p, k) grid search at the requested labeled fractions, and writes one heatmap
CSV plus a summary line per fraction.
"""

import argparse
import os

from pccgraph import PccConfig, TrialSpec, format_summary, grid_search, load_feature_table, write_heatmap


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--features", required=True, help="fully labeled feature CSV")
    parser.add_argument("--fractions", type=float, nargs="+", default=[0.1, 0.2])
    parser.add_argument("--reps", type=int, default=100)
    parser.add_argument("--pmax", type=int, default=20)
    parser.add_argument("--kmax", type=int, default=20)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    parser.add_argument("--out-prefix", default="heatmap", help="output CSV prefix")
    args = parser.parse_args()

    dataset = load_feature_table(args.features)
    tag = os.path.splitext(os.path.basename(args.features))[0]
    config = PccConfig()
    for fraction in args.fractions:
        spec = TrialSpec(
            labeled_fraction=fraction,
            repetitions=args.reps,
            p_range=(1, args.pmax),
            k_range=(1, args.kmax),
            base_seed=args.seed,
        )
        grid = grid_search(dataset, spec, config, threads=args.threads)
        out = f"{args.out_prefix}_{int(round(fraction * 100))}pct.csv"
        write_heatmap(grid, out)
        print(format_summary(grid, fraction, tag))
        print(f"wrote {out}")


if __name__ == "__main__":
    main()
