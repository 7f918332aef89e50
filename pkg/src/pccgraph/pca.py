"""Principal component analysis: centering-only fit plus projection to p components."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .io_formats import FeatureMatrix

# Relative singular-value cutoff below which a direction is treated as zero
# variance and replaced by a deterministic orthonormal filler. Keeps the
# Gram-matrix route well conditioned (error grows like eps * s_max / s_i).
_RANK_RTOL = 1e-7


@dataclass
class PcaModel:
    """Fitted transform: per-feature mean, orthonormal component rows, variances.

    Component rows are ordered by descending explained variance; variances use
    the 1/(n-1) normalization.
    """

    mean: np.ndarray
    components: np.ndarray
    explained_variance: np.ndarray

    @property
    def p_max(self) -> int:
        return self.components.shape[0]

    @property
    def d(self) -> int:
        return self.components.shape[1]


def _fill_orthonormal(rows: np.ndarray, count: int, d: int) -> np.ndarray:
    """Extend orthonormal `rows` with `count` more unit vectors, deterministically.

    Candidates are standard basis vectors, Gram-Schmidt-projected against
    everything accepted so far. Used only for zero-variance directions, where
    any orthonormal completion is valid.
    """
    out = []
    have = [r for r in rows]
    j = 0
    while len(out) < count:
        if j >= d:
            raise RuntimeError("cannot complete orthonormal basis")
        v = np.zeros(d)
        v[j] = 1.0
        for _ in range(2):  # repeated projection for numerical orthogonality
            for r in have:
                v -= (r @ v) * r
        norm = np.linalg.norm(v)
        if norm > 1e-6:
            v /= norm
            have.append(v)
            out.append(v)
        j += 1
    return np.array(out)


def _orient(components: np.ndarray) -> np.ndarray:
    """Make each component's largest-magnitude entry positive (stable sign convention)."""
    for row in components:
        i = int(np.argmax(np.abs(row)))
        if row[i] < 0:
            row *= -1.0
    return components


def pca_fit(X: FeatureMatrix, p_max: int) -> PcaModel:
    """Fit the top-`p_max` principal components of the centered data.

    Works on the n x n Gram matrix when d > n (the tall-feature regime), and
    on the thin SVD of the centered matrix otherwise. `p_max` beyond
    min(n-1, d) is clamped with a warning; all-constant data yields zero
    variances and arbitrary orthonormal components.
    """
    vals = X.values
    n, d = vals.shape
    if n < 2:
        raise ValueError(f"need at least 2 rows to fit, got {n}")
    if p_max < 1:
        raise ValueError(f"p_max must be >= 1, got {p_max}")
    cap = min(n - 1, d)
    if p_max > cap:
        warnings.warn(
            f"p_max={p_max} exceeds min(n-1, d)={cap}; clamping", stacklevel=2
        )
        p_max = cap

    mean = vals.mean(axis=0)
    centered = vals - mean

    if d > n:
        # Gram route: eigenvectors of centered @ centered.T lift to components
        # at O(n^2 d) instead of O(n d^2).
        gram = centered @ centered.T
        eigvals, eigvecs = np.linalg.eigh(gram)
        order = np.argsort(eigvals, kind="stable")[::-1]
        eigvals = np.clip(eigvals[order], 0.0, None)
        eigvecs = eigvecs[:, order]
        sv = np.sqrt(eigvals)
        tol = sv[0] * _RANK_RTOL if sv[0] > 0 else 0.0
        rank = int(np.sum(sv > tol)) if tol > 0 else 0
        rank = min(rank, p_max)
        comp = (centered.T @ eigvecs[:, :rank] / sv[:rank]).T
        if rank > 0:
            # re-orthonormalize the lifted rows (QR preserves their order)
            q, _ = np.linalg.qr(comp.T)
            comp = q.T
        variance = eigvals[:p_max] / (n - 1)
        variance[rank:] = 0.0
    else:
        _, sv, vt = np.linalg.svd(centered, full_matrices=False)
        comp = vt[:p_max]
        tol = sv[0] * _RANK_RTOL if sv[0] > 0 else 0.0
        rank = min(int(np.sum(sv > tol)) if tol > 0 else 0, p_max)
        variance = (sv[:p_max] ** 2) / (n - 1)
        variance[rank:] = 0.0

    if rank < p_max:
        filler = _fill_orthonormal(comp[:rank], p_max - rank, d)
        comp = np.vstack([comp[:rank], filler]) if rank > 0 else filler

    return PcaModel(mean, _orient(np.ascontiguousarray(comp)), variance)


def pca_transform(model: PcaModel, X: FeatureMatrix, p: int) -> FeatureMatrix:
    """Project rows onto the first `p` components: Z = (X - mean) @ components[:p].T."""
    if not 1 <= p <= model.p_max:
        raise ValueError(f"p must be in [1, {model.p_max}], got {p}")
    if X.d != model.d:
        raise ValueError(f"feature count {X.d} != fitted dimensionality {model.d}")
    scores = (X.values - model.mean) @ model.components[:p].T
    return FeatureMatrix(list(X.ids), scores)
