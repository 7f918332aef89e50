"""Command-line entry point: each pipeline stage as an independently scriptable subcommand."""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import asdict

import numpy as np

from .engine import PccConfig, pcc_run
from .evaluation import TrialSpec, format_summary, grid_search, sample_labeled_mask, accuracy
from .graph import build_knn_graph, dump_adjacency, graph_diagnostics
from .io_formats import (
    LabeledDataset,
    load_feature_table,
    read_heatmap,
    write_feature_table,
    write_heatmap,
    write_predictions,
)
from .pca import pca_fit, pca_transform
from .synth import gen_blobs, gen_moons

_DEFAULTS = PccConfig()


def _add_engine_args(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--seed", type=int, default=_DEFAULTS.seed, help="RNG seed controlling all randomness")
    sp.add_argument("--pgrd", type=float, default=_DEFAULTS.p_grd, help="probability of the greedy movement rule")
    sp.add_argument("--deltav", type=float, default=_DEFAULTS.delta_v, help="domination change rate per visit")
    sp.add_argument("--dist-exponent", type=float, default=_DEFAULTS.dist_exponent, help="exponent on the inverse distance-to-home factor")
    sp.add_argument("--max-sweeps", type=int, default=None, help="hard sweep cap (default: max(10000, 500000/particles))")
    sp.add_argument("--conv-eps", type=float, default=_DEFAULTS.conv_epsilon, help="convergence threshold on mean domination drift")


def _config_from(args: argparse.Namespace) -> PccConfig:
    return PccConfig(
        p_grd=args.pgrd,
        delta_v=args.deltav,
        dist_exponent=args.dist_exponent,
        max_sweeps=args.max_sweeps,
        conv_epsilon=args.conv_eps,
        seed=args.seed,
    )


def _threads_from(args: argparse.Namespace) -> int:
    if args.threads is not None:
        return args.threads
    env = os.environ.get("PCC_THREADS")
    if env:
        return int(env)
    return os.cpu_count() or 1


def _load(args: argparse.Namespace) -> LabeledDataset:
    dataset = load_feature_table(args.features)
    if getattr(args, "labels_from", None):
        dataset = _relabel(dataset, args.labels_from)
    return dataset


def _relabel(dataset: LabeledDataset, path: str) -> LabeledDataset:
    """Replace the dataset's labels with those in a separate `id,label` CSV;
    ids missing from the file become unlabeled."""
    mapping: dict[str, str] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != ["id", "label"]:
            raise ValueError(f"{path}: label file header must be 'id,label'")
        for row in reader:
            if len(row) >= 2:
                mapping[row[0]] = row[1]
    names = sorted({lab for lab in mapping.values() if lab != ""})
    index = {name: i for i, name in enumerate(names)}
    labels = np.array(
        [index.get(mapping.get(item, ""), -1) for item in dataset.features.ids],
        dtype=np.int64,
    )
    return LabeledDataset(dataset.features, labels, names)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pcc",
        description="Semi-supervised classification: PCA -> k-NN graph -> particle competition and cooperation.",
    )
    parser.add_argument(
        "--print-config",
        action="store_true",
        help="print all engine defaults as JSON and exit",
    )
    sub = parser.add_subparsers(dest="command")
    fmt = argparse.ArgumentDefaultsHelpFormatter

    sp = sub.add_parser("pca", help="fit PCA and write reduced features", formatter_class=fmt)
    sp.add_argument("--features", required=True, help="input feature CSV")
    sp.add_argument("--p", type=int, required=True, help="components to keep")
    sp.add_argument("--pmax", type=int, default=None, help="components to fit (default: --p)")
    sp.add_argument("--out", required=True, help="output feature CSV")

    sp = sub.add_parser("graph", help="build the k-NN graph and report diagnostics", formatter_class=fmt)
    sp.add_argument("--features", required=True, help="input feature CSV (typically reduced)")
    sp.add_argument("--k", type=int, required=True, help="neighbors per node")
    sp.add_argument("--out", default=None, help="optional adjacency dump path")

    sp = sub.add_parser("classify", help="label the unlabeled rows of a feature table", formatter_class=fmt)
    sp.add_argument("--features", required=True, help="input feature CSV")
    sp.add_argument("--labels-from", default=None, help="separate id,label CSV overriding the label column")
    sp.add_argument("--p", type=int, required=True, help="principal components")
    sp.add_argument("--k", type=int, required=True, help="neighbors per node")
    sp.add_argument("--fraction", type=float, default=None, help="hide all but this stratified fraction of the labels and report accuracy on the rest")
    _add_engine_args(sp)
    sp.add_argument("--trace", default=None, help="write a per-sweep JSON trace to this path")
    sp.add_argument("--out", required=True, help="output prediction CSV")

    sp = sub.add_parser("grid-search", help="mean accuracy over a (p, k) grid", formatter_class=fmt)
    sp.add_argument("--features", required=True, help="input feature CSV (fully labeled)")
    sp.add_argument("--labels-from", default=None, help="separate id,label CSV overriding the label column")
    sp.add_argument("--fraction", type=float, default=0.1, help="labeled fraction per trial")
    sp.add_argument("--reps", type=int, default=100, help="repetitions per grid cell")
    sp.add_argument("--pmin", type=int, default=1, help="smallest p")
    sp.add_argument("--pmax", type=int, default=20, help="largest p")
    sp.add_argument("--kmin", type=int, default=1, help="smallest k")
    sp.add_argument("--kmax", type=int, default=20, help="largest k")
    _add_engine_args(sp)
    sp.add_argument("--threads", type=int, default=None, help="parallel workers (default: PCC_THREADS or all cores)")
    sp.add_argument("--tag", default=None, help="feature-source tag for the summary line (default: features filename)")
    sp.add_argument("--out", required=True, help="output heatmap CSV")

    sp = sub.add_parser("synth", help="generate synthetic labeled datasets", formatter_class=fmt)
    synth_sub = sp.add_subparsers(dest="shape", required=True)
    bp = synth_sub.add_parser("blobs", help="Gaussian clusters on separated centers", formatter_class=fmt)
    bp.add_argument("--n", type=int, required=True)
    bp.add_argument("--classes", type=int, default=2)
    bp.add_argument("--dim", type=int, default=2)
    bp.add_argument("--separation", type=float, default=6.0, help="center spacing in sigma units")
    bp.add_argument("--sigma", type=float, default=1.0)
    bp.add_argument("--seed", type=int, default=0)
    bp.add_argument("--out", required=True)
    mp = synth_sub.add_parser("moons", help="two interleaved noisy half-circles", formatter_class=fmt)
    mp.add_argument("--n", type=int, required=True)
    mp.add_argument("--noise", type=float, default=0.05)
    mp.add_argument("--seed", type=int, default=0)
    mp.add_argument("--out", required=True)

    sp = sub.add_parser("report", help="summarize a heatmap CSV", formatter_class=fmt)
    sp.add_argument("--heatmap", required=True, help="heatmap CSV from grid-search")
    sp.add_argument("--top", type=int, default=5, help="cells to list")

    return parser


def _cmd_pca(args) -> int:
    dataset = load_feature_table(args.features)
    p_max = args.pmax if args.pmax is not None else args.p
    model = pca_fit(dataset.features, p_max)
    reduced = pca_transform(model, dataset.features, args.p)
    write_feature_table(LabeledDataset(reduced, dataset.labels, dataset.classes), args.out)
    kept = model.explained_variance[: args.p].sum()
    total = model.explained_variance.sum()
    share = kept / total if total > 0 else 1.0
    print(f"wrote {args.out}: {reduced.n} rows x {reduced.d} components "
          f"({share * 100:.1f}% of fitted variance)")
    return 0


def _cmd_graph(args) -> int:
    dataset = load_feature_table(args.features)
    g = build_knn_graph(dataset.features, args.k)
    diag = graph_diagnostics(g)
    edges = int(g.degrees.sum()) // 2
    print(
        f"nodes={g.n} edges={edges} "
        f"degree=[{diag.degree_min}, {diag.degree_mean:.2f}, {diag.degree_max}] "
        f"components={diag.component_count} sizes={diag.component_sizes}"
    )
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            dump_adjacency(g, fh, ids=dataset.features.ids)
        print(f"wrote {args.out}")
    return 0


def _cmd_classify(args) -> int:
    dataset = _load(args)
    config = _config_from(args)
    model = pca_fit(dataset.features, args.p)
    reduced = pca_transform(model, dataset.features, args.p)
    g = build_knn_graph(reduced, args.k)

    if args.fraction is not None:
        mask = sample_labeled_mask(
            dataset.labels, args.fraction, args.seed, num_classes=dataset.num_classes
        )
        given = np.where(mask, dataset.labels, -1)
    else:
        mask = None
        given = dataset.labels

    trace_fh = open(args.trace, "w", encoding="utf-8") if args.trace else None
    try:
        pred = pcc_run(g, given, config, num_classes=dataset.num_classes, trace=trace_fh)
    finally:
        if trace_fh:
            trace_fh.close()

    write_predictions(dataset, pred, args.out)
    line = f"wrote {args.out}: sweeps={pred.sweeps} converged={pred.converged}"
    if mask is not None:
        line += f" accuracy={accuracy(pred, dataset.labels, mask):.4f}"
    print(line)
    return 0


def _cmd_grid_search(args) -> int:
    dataset = _load(args)
    spec = TrialSpec(
        labeled_fraction=args.fraction,
        repetitions=args.reps,
        p_range=(args.pmin, args.pmax),
        k_range=(args.kmin, args.kmax),
        base_seed=args.seed,
    )
    grid = grid_search(dataset, spec, _config_from(args), threads=_threads_from(args))
    write_heatmap(grid, args.out)
    tag = args.tag if args.tag else os.path.splitext(os.path.basename(args.features))[0]
    print(format_summary(grid, args.fraction, tag))
    print(f"wrote {args.out}")
    return 0


def _cmd_synth(args) -> int:
    if args.shape == "blobs":
        dataset = gen_blobs(
            args.n, args.classes, dim=args.dim,
            separation=args.separation, sigma=args.sigma, seed=args.seed,
        )
    else:
        dataset = gen_moons(args.n, noise=args.noise, seed=args.seed)
    write_feature_table(dataset, args.out)
    print(f"wrote {args.out}: {dataset.n} rows, {dataset.num_classes} classes")
    return 0


def _cmd_report(args) -> int:
    p_values, k_values, means = read_heatmap(args.heatmap)
    cells = [
        (means[i, j], p, k)
        for i, p in enumerate(p_values)
        for j, k in enumerate(k_values)
    ]
    cells.sort(key=lambda t: (-t[0], t[1], t[2]))
    best = cells[0]
    print(f"best: p={best[1]} k={best[2]} mean={best[0] * 100:.2f}%")
    for mean, p, k in cells[: args.top]:
        print(f"  p={p:>3} k={k:>3} mean={mean * 100:.2f}%")
    return 0


_COMMANDS = {
    "pca": _cmd_pca,
    "graph": _cmd_graph,
    "classify": _cmd_classify,
    "grid-search": _cmd_grid_search,
    "synth": _cmd_synth,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help or usage error; keep argparse's code
        return int(exc.code or 0)

    if args.print_config:
        defaults = asdict(_DEFAULTS)
        defaults["threads"] = os.cpu_count() or 1
        print(json.dumps(defaults, indent=2, sort_keys=True))
        return 0
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    try:
        return _COMMANDS[args.command](args)
    except Exception as exc:
        print(f"error: {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
