#!/usr/bin/env python3
"""Benchmark the pipeline on synthetic data across seeds and labeled fractions."""

import argparse

import numpy as np

from pccgraph import PccConfig, evaluate_once, gen_blobs, gen_moons, pca_fit


def run(name, make_dataset, fraction, seeds, config):
    accs = []
    for seed in range(seeds):
        ds = make_dataset(seed)
        model = pca_fit(ds.features, 2)
        accs.append(evaluate_once(ds, model, 2, 5, fraction, 10_000 + seed, config))
    accs = np.array(accs)
    print(
        f"{name:<22} fraction={fraction:<5} mean={accs.mean():.4f} "
        f"std={accs.std():.4f} min={accs.min():.4f}"
    )


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=200)
    parser.add_argument("--seeds", type=int, default=30)
    parser.add_argument("--fractions", type=float, nargs="+", default=[0.1, 0.2])
    args = parser.parse_args()

    config = PccConfig()
    for fraction in args.fractions:
        run(
            "blobs (6 sigma apart)",
            lambda s: gen_blobs(args.n, 2, dim=2, separation=6.0, sigma=1.0, seed=s),
            fraction,
            args.seeds,
            config,
        )
        run(
            "moons (noise 0.05)",
            lambda s: gen_moons(args.n, noise=0.05, seed=s),
            fraction,
            args.seeds,
            config,
        )


if __name__ == "__main__":
    main()
