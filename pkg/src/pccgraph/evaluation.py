"""Evaluation protocol: stratified label sampling, repeated trials, (p, k) grid search."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from joblib import Parallel, delayed

from .engine import PccConfig, Prediction, pcc_run
from .graph import build_knn_graph
from .io_formats import FeatureMatrix, LabeledDataset
from .pca import PcaModel, pca_fit, pca_transform


@dataclass
class TrialSpec:
    """One grid-search campaign: labeled fraction, repetitions per cell, and
    inclusive (p, k) ranges."""

    labeled_fraction: float
    repetitions: int
    p_range: tuple[int, int]
    k_range: tuple[int, int]
    base_seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.labeled_fraction <= 1.0:
            raise ValueError(f"labeled_fraction must be in (0, 1], got {self.labeled_fraction}")
        if self.repetitions < 1:
            raise ValueError(f"repetitions must be >= 1, got {self.repetitions}")
        for name, (lo, hi) in (("p_range", self.p_range), ("k_range", self.k_range)):
            if lo < 1 or hi < lo:
                raise ValueError(f"{name} must be a non-empty interval of ints >= 1, got {lo}..{hi}")


@dataclass
class GridResult:
    """Per-cell mean/stddev accuracy over repetitions, plus the argmax cell
    (ties resolve to the smallest p, then the smallest k)."""

    p_values: list[int]
    k_values: list[int]
    means: np.ndarray
    stds: np.ndarray
    repetitions: int
    best_p: int
    best_k: int

    @property
    def best_mean(self) -> float:
        return float(self.means[self.p_values.index(self.best_p), self.k_values.index(self.best_k)])

    @property
    def best_std(self) -> float:
        return float(self.stds[self.p_values.index(self.best_p), self.k_values.index(self.best_k)])


def trial_seed(base_seed: int, p: int, k: int, rep: int) -> int:
    """Stable per-trial seed derived from (base_seed, p, k, rep)."""
    ss = np.random.SeedSequence((base_seed, p, k, rep))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _split_seed(seed: int) -> tuple[int, int]:
    # one stream for mask sampling, one for the particle dynamics
    a, b = np.random.SeedSequence(seed).generate_state(2, dtype=np.uint64)
    return int(a), int(b)


def sample_labeled_mask(
    labels, fraction: float, seed: int, num_classes: int | None = None
) -> np.ndarray:
    """Stratified labeled-subset mask: per class, floor(fraction * size) nodes
    chosen uniformly without replacement, at least one per class."""
    arr = np.asarray(labels, dtype=np.int64)
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"fraction must be in (0, 1], got {fraction}")
    if np.any(arr < 0):
        raise ValueError("ground-truth labels must cover every node")
    c = num_classes if num_classes is not None else int(arr.max()) + 1
    rng = np.random.default_rng(seed)
    mask = np.zeros(arr.shape[0], dtype=bool)
    for cls in range(c):
        members = np.flatnonzero(arr == cls)
        if members.size == 0:
            raise ValueError(f"class {cls} has no members")
        take = max(1, math.floor(fraction * members.size))
        mask[rng.choice(members, size=take, replace=False)] = True
    return mask


def accuracy(prediction, truth, mask) -> float:
    """Fraction of correctly predicted nodes among the unlabeled ones."""
    pred = prediction.labels if isinstance(prediction, Prediction) else np.asarray(prediction)
    truth = np.asarray(truth)
    mask = np.asarray(mask, dtype=bool)
    if not pred.shape[0] == truth.shape[0] == mask.shape[0]:
        raise ValueError("prediction, truth, and mask lengths differ")
    hidden = ~mask
    total = int(hidden.sum())
    if total == 0:
        raise ValueError("no unlabeled nodes to score")
    return float(np.sum(pred[hidden] == truth[hidden]) / total)


def evaluate_once(
    dataset: LabeledDataset,
    model: PcaModel,
    p: int,
    k: int,
    fraction: float,
    seed: int,
    config: PccConfig,
) -> float:
    """One trial: project to p components, build the k-NN graph, reveal a
    stratified labeled subset, run the particle dynamics, score the rest.
    Fully deterministic given `seed`."""
    mask_seed, engine_seed = _split_seed(seed)
    reduced = pca_transform(model, dataset.features, p)
    g = build_knn_graph(reduced, k)
    mask = sample_labeled_mask(
        dataset.labels, fraction, mask_seed, num_classes=dataset.num_classes
    )
    given = np.where(mask, dataset.labels, -1)
    pred = pcc_run(
        g, given, replace(config, seed=engine_seed), num_classes=dataset.num_classes
    )
    return accuracy(pred, dataset.labels, mask)


def _run_cell(
    reduced_values: np.ndarray,
    labels: np.ndarray,
    num_classes: int,
    k: int,
    fraction: float,
    seeds: list[int],
    config: PccConfig,
) -> list[float]:
    """All repetitions of one (p, k) cell; the graph is built once and reused
    since it does not depend on the revealed labels."""
    reduced = FeatureMatrix([str(i) for i in range(reduced_values.shape[0])], reduced_values)
    g = build_knn_graph(reduced, k)
    out = []
    for seed in seeds:
        mask_seed, engine_seed = _split_seed(seed)
        mask = sample_labeled_mask(labels, fraction, mask_seed, num_classes=num_classes)
        given = np.where(mask, labels, -1)
        pred = pcc_run(g, given, replace(config, seed=engine_seed), num_classes=num_classes)
        out.append(accuracy(pred, labels, mask))
    return out


def grid_search(
    dataset: LabeledDataset,
    spec: TrialSpec,
    config: PccConfig,
    threads: int = 1,
) -> GridResult:
    """Evaluate every (p, k) cell with `spec.repetitions` independent trials.

    PCA is fitted exactly once (with p_max = max of p_range) and reused; the
    transform is label-independent so reuse leaks nothing. Cells run in
    parallel when threads > 1, with per-trial seeds derived from
    (base_seed, p, k, rep), so results do not depend on scheduling.
    """
    p_values = list(range(spec.p_range[0], spec.p_range[1] + 1))
    k_values = list(range(spec.k_range[0], spec.k_range[1] + 1))
    model = pca_fit(dataset.features, p_max=p_values[-1])

    tasks = []
    for p in p_values:
        reduced = pca_transform(model, dataset.features, p)
        for k in k_values:
            seeds = [trial_seed(spec.base_seed, p, k, rep) for rep in range(spec.repetitions)]
            tasks.append(
                delayed(_run_cell)(
                    reduced.values,
                    dataset.labels,
                    dataset.num_classes,
                    k,
                    spec.labeled_fraction,
                    seeds,
                    config,
                )
            )
    cell_accuracies = Parallel(n_jobs=threads)(tasks)

    means = np.zeros((len(p_values), len(k_values)))
    stds = np.zeros_like(means)
    for idx, accs in enumerate(cell_accuracies):
        i, j = divmod(idx, len(k_values))
        means[i, j] = np.mean(accs)
        stds[i, j] = np.std(accs)  # population stddev: well defined for 1 rep

    best_i, best_j = 0, 0
    for i in range(len(p_values)):
        for j in range(len(k_values)):
            if means[i, j] > means[best_i, best_j]:
                best_i, best_j = i, j
    return GridResult(
        p_values=p_values,
        k_values=k_values,
        means=means,
        stds=stds,
        repetitions=spec.repetitions,
        best_p=p_values[best_i],
        best_k=k_values[best_j],
    )


def format_summary(grid: GridResult, labeled_fraction: float, tag: str) -> str:
    """One-line report of the best cell: labeled%, feature tag, p, k, mean, std."""
    return (
        f"labeled={labeled_fraction * 100:g}% features={tag} "
        f"p={grid.best_p} k={grid.best_k} "
        f"mean={grid.best_mean * 100:.2f}% std={grid.best_std * 100:.2f}%"
    )
