"""Synthetic labeled datasets for exercising the full pipeline without real features."""

from __future__ import annotations

import numpy as np

from .io_formats import FeatureMatrix, LabeledDataset


def _class_names(c: int) -> list[str]:
    width = len(str(c - 1))
    return [f"c{i:0{width}d}" for i in range(c)]


def _item_ids(n: int) -> list[str]:
    width = len(str(n - 1))
    return [f"item-{i:0{width}d}" for i in range(n)]


def _simplex_centers(c: int, dim: int, spacing: float) -> np.ndarray:
    """c centers in R^dim with pairwise distance exactly `spacing`.

    Scaled simplex vertices: works for any dim >= c-1.
    """
    if dim < c - 1:
        raise ValueError(f"dim={dim} cannot hold {c} mutually equidistant centers")
    verts = np.eye(c) / np.sqrt(2.0)  # pairwise distance 1
    verts -= verts.mean(axis=0)  # rank c-1, centered
    _, _, vt = np.linalg.svd(verts, full_matrices=False)
    coords = verts @ vt[: c - 1].T
    centers = np.zeros((c, dim))
    centers[:, : c - 1] = coords * spacing
    return centers


def gen_blobs(
    n: int,
    c: int = 2,
    dim: int = 2,
    separation: float = 6.0,
    sigma: float = 1.0,
    seed: int = 0,
) -> LabeledDataset:
    """c isotropic Gaussian clusters with centers `separation * sigma` apart,
    balanced class sizes (+-1), deterministic under seed."""
    if not n >= c >= 2:
        raise ValueError(f"need n >= c >= 2, got n={n}, c={c}")
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    centers = _simplex_centers(c, dim, separation * sigma)
    rng = np.random.default_rng(seed)

    base, extra = divmod(n, c)
    sizes = [base + (1 if i < extra else 0) for i in range(c)]
    parts, labels = [], []
    for cls, size in enumerate(sizes):
        parts.append(centers[cls] + rng.normal(0.0, sigma, size=(size, dim)))
        labels.extend([cls] * size)

    values = np.vstack(parts)
    return LabeledDataset(
        FeatureMatrix(_item_ids(n), values),
        np.array(labels, dtype=np.int64),
        _class_names(c),
    )


def gen_moons(n: int, noise: float = 0.05, seed: int = 0) -> LabeledDataset:
    """Two interleaved half-circles (unit radius) with Gaussian coordinate noise."""
    if n < 4:
        raise ValueError(f"need n >= 4, got {n}")
    n_outer = n - n // 2
    n_inner = n // 2
    t_outer = np.linspace(0.0, np.pi, n_outer)
    t_inner = np.linspace(0.0, np.pi, n_inner)
    outer = np.column_stack([np.cos(t_outer), np.sin(t_outer)])
    inner = np.column_stack([1.0 - np.cos(t_inner), 0.5 - np.sin(t_inner)])
    values = np.vstack([outer, inner])
    if noise > 0.0:
        values = values + np.random.default_rng(seed).normal(0.0, noise, size=values.shape)
    labels = np.array([0] * n_outer + [1] * n_inner, dtype=np.int64)
    return LabeledDataset(FeatureMatrix(_item_ids(n), values), labels, _class_names(2))
