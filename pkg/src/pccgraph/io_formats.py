"""CSV formats shared by all pipeline stages: feature tables in, predictions and heatmaps out."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from .engine import Prediction
    from .evaluation import GridResult


class FormatError(ValueError):
    """Malformed input file; message carries the offending line number."""


def _fmt(x) -> str:
    # 9 significant digits: round-trips within 1e-9 for values in [0, 1]
    return f"{float(x):.9g}"


@dataclass
class FeatureMatrix:
    """n x d matrix of finite feature values with stable per-row item ids."""

    ids: list[str]
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ValueError(f"values must be 2-D, got shape {self.values.shape}")
        if len(self.ids) != self.values.shape[0]:
            raise ValueError(
                f"{len(self.ids)} ids for {self.values.shape[0]} rows"
            )
        if len(set(self.ids)) != len(self.ids):
            raise ValueError("duplicate item ids")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("feature values must be finite")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]


@dataclass
class LabeledDataset:
    """Feature matrix plus per-item class labels (-1 = unlabeled) and the class dictionary."""

    features: FeatureMatrix
    labels: np.ndarray
    classes: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.labels.shape != (self.features.n,):
            raise ValueError(
                f"label array length {self.labels.shape} != item count {self.features.n}"
            )
        c = len(self.classes)
        bad = (self.labels < -1) | (self.labels >= c)
        if np.any(bad):
            raise ValueError(f"label index out of range [0, {c})")

    @property
    def n(self) -> int:
        return self.features.n

    @property
    def num_classes(self) -> int:
        return len(self.classes)


def load_feature_table(path) -> LabeledDataset:
    """Parse a Feature CSV (header ``id,label,f0,...,f{d-1}``) into a LabeledDataset.

    Items with an empty label cell are unlabeled (-1). The class dictionary is
    the lexicographically sorted set of distinct label strings, so label
    indices are reproducible across runs.

    Raises FormatError (with the offending line number) on malformed header,
    ragged rows, non-numeric or non-finite feature cells, duplicate ids, or
    a file with no data rows.
    """
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError(f"{path}: line 1: empty file") from None
        if len(header) < 2 or header[0] != "id" or header[1] != "label":
            raise FormatError(f"{path}: line 1: header must start with 'id,label'")
        d = len(header) - 2
        expected = [f"f{i}" for i in range(d)]
        if header[2:] != expected:
            raise FormatError(
                f"{path}: line 1: feature columns must be f0..f{d - 1} in order"
            )

        ids: list[str] = []
        raw_labels: list[str] = []
        rows: list[list[float]] = []
        seen: set[str] = set()
        for lineno, row in enumerate(reader, start=2):
            if len(row) != d + 2:
                raise FormatError(
                    f"{path}: line {lineno}: expected {d + 2} cells, got {len(row)}"
                )
            item_id = row[0]
            if item_id in seen:
                raise FormatError(f"{path}: line {lineno}: duplicate id {item_id!r}")
            seen.add(item_id)
            feats = []
            for j, cell in enumerate(row[2:]):
                try:
                    v = float(cell)
                except ValueError:
                    raise FormatError(
                        f"{path}: line {lineno}: non-numeric value {cell!r} in column f{j}"
                    ) from None
                if not math.isfinite(v):
                    raise FormatError(
                        f"{path}: line {lineno}: non-finite value {cell!r} in column f{j}"
                    )
                feats.append(v)
            ids.append(item_id)
            raw_labels.append(row[1])
            rows.append(feats)

    if not rows:
        raise FormatError(f"{path}: line 2: no data rows")

    classes = sorted({lab for lab in raw_labels if lab != ""})
    index = {name: i for i, name in enumerate(classes)}
    labels = np.array([index.get(lab, -1) for lab in raw_labels], dtype=np.int64)
    values = np.array(rows, dtype=np.float64)
    return LabeledDataset(FeatureMatrix(ids, values), labels, classes)


def write_feature_table(dataset: LabeledDataset, path) -> None:
    """Write a LabeledDataset back out in Feature CSV form (empty cell = unlabeled)."""
    feats = dataset.features
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "label"] + [f"f{i}" for i in range(feats.d)])
        for i in range(feats.n):
            lab = dataset.classes[dataset.labels[i]] if dataset.labels[i] >= 0 else ""
            writer.writerow([feats.ids[i], lab] + [_fmt(v) for v in feats.values[i]])


def write_predictions(dataset: LabeledDataset, prediction: "Prediction", path) -> None:
    """Write a Prediction CSV: ``id,predicted_label,dom_0,...,dom_{C-1}``.

    Domination rows must sum to 1 within 1e-6; the predicted label is written
    as its class name from the dataset dictionary.
    """
    labels = np.asarray(prediction.labels)
    dom = np.asarray(prediction.domination, dtype=np.float64)
    if labels.shape[0] != dataset.n:
        raise ValueError(
            f"prediction covers {labels.shape[0]} items, dataset has {dataset.n}"
        )
    if dom.shape != (dataset.n, dataset.num_classes):
        raise ValueError(
            f"domination shape {dom.shape} != ({dataset.n}, {dataset.num_classes})"
        )
    sums = dom.sum(axis=1)
    if np.any(np.abs(sums - 1.0) > 1e-6):
        worst = int(np.argmax(np.abs(sums - 1.0)))
        raise ValueError(f"domination row {worst} sums to {sums[worst]}, not 1")

    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["id", "predicted_label"] + [f"dom_{c}" for c in range(dataset.num_classes)]
        )
        for i in range(dataset.n):
            writer.writerow(
                [dataset.features.ids[i], dataset.classes[int(labels[i])]]
                + [_fmt(v) for v in dom[i]]
            )


def read_predictions(path) -> tuple[list[str], list[str], np.ndarray]:
    """Parse a Prediction CSV back into (ids, predicted class names, domination matrix)."""
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[:2] != ["id", "predicted_label"]:
            raise FormatError(f"{path}: line 1: bad prediction header")
        c = len(header) - 2
        ids, names, dom = [], [], []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != c + 2:
                raise FormatError(
                    f"{path}: line {lineno}: expected {c + 2} cells, got {len(row)}"
                )
            ids.append(row[0])
            names.append(row[1])
            dom.append([float(x) for x in row[2:]])
    return ids, names, np.array(dom, dtype=np.float64)


def write_heatmap(grid: "GridResult", path) -> None:
    """Write a grid-search heatmap CSV: header ``p\\k,1,...,kmax``, one row per p value."""
    means = grid.means
    if isinstance(means, np.ndarray):
        cells = means.tolist()
    else:
        cells = [list(row) for row in means]
    widths = {len(row) for row in cells}
    if len(cells) == 0 or widths != {len(grid.k_values)}:
        raise ValueError("heatmap grid must be non-empty and rectangular")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["p\\k"] + [str(k) for k in grid.k_values])
        for p, row in zip(grid.p_values, cells):
            writer.writerow([str(p)] + [_fmt(v) for v in row])


def read_heatmap(path) -> tuple[list[int], list[int], np.ndarray]:
    """Parse a heatmap CSV back into (p values, k values, mean-accuracy matrix)."""
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[0] != "p\\k":
            raise FormatError(f"{path}: line 1: bad heatmap header")
        k_values = [int(k) for k in header[1:]]
        p_values, rows = [], []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(k_values) + 1:
                raise FormatError(
                    f"{path}: line {lineno}: expected {len(k_values) + 1} cells"
                )
            p_values.append(int(row[0]))
            rows.append([float(x) for x in row[1:]])
    return p_values, k_values, np.array(rows, dtype=np.float64)
