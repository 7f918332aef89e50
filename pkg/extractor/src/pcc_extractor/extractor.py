"""Turn an image directory into a Feature CSV using frozen pretrained convnets.

Images are resized to 224 x 224 (bilinear), pushed through VGG16 and/or VGG19
without their classification layers, and the activations of the last
convolutional block are written one row per image. With no pooling the
7 x 7 x 512 output is flattened row-major over the spatial grid with the
channel index minor (h, then w, then channel); global average or max pooling
reduces it to 512 values per network. The networks are never fine-tuned.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

ARCHITECTURES = ("vgg16", "vgg19", "concat")
POOLINGS = ("none", "avg", "max")
INPUT_SIZE = (224, 224)

_SPATIAL_CELLS = 7 * 7
_CHANNELS = 512


@dataclass(frozen=True)
class ExtractorSpec:
    """What to extract: backbone(s), pooling mode, and weight source."""

    architecture: str = "vgg16"
    pooling: str = "none"
    weights: str | None = "imagenet"

    def __post_init__(self):
        if self.architecture not in ARCHITECTURES:
            raise ValueError(
                f"unknown architecture {self.architecture!r}; choose from {ARCHITECTURES}"
            )
        if self.pooling not in POOLINGS:
            raise ValueError(
                f"unknown pooling {self.pooling!r}; choose from {POOLINGS}"
            )

    @property
    def feature_count(self) -> int:
        per_network = _CHANNELS * (_SPATIAL_CELLS if self.pooling == "none" else 1)
        return per_network * (2 if self.architecture == "concat" else 1)


@dataclass
class ExtractionReport:
    written: int
    skipped: list[tuple[str, str]] = field(default_factory=list)  # (filename, reason)


class FeatureExtractor:
    """Holds the built backbone(s); one instance serves many extract calls."""

    def __init__(self, spec: ExtractorSpec):
        import tensorflow as tf  # deferred: heavy import

        self.spec = spec
        pooling = None if spec.pooling == "none" else spec.pooling
        kwargs = dict(
            include_top=False,
            weights=spec.weights,
            pooling=pooling,
            input_shape=(*INPUT_SIZE, 3),
        )
        if spec.architecture == "vgg16":
            self._backbones = [("vgg16", tf.keras.applications.VGG16(**kwargs))]
        elif spec.architecture == "vgg19":
            self._backbones = [("vgg19", tf.keras.applications.VGG19(**kwargs))]
        else:
            self._backbones = [
                ("vgg16", tf.keras.applications.VGG16(**kwargs)),
                ("vgg19", tf.keras.applications.VGG19(**kwargs)),
            ]

    def features(self, batch: np.ndarray) -> np.ndarray:
        """(b, 224, 224, 3) RGB floats in [0, 255] -> (b, feature_count)."""
        from tensorflow.keras.applications import vgg16, vgg19

        preprocess = {"vgg16": vgg16.preprocess_input, "vgg19": vgg19.preprocess_input}
        parts = []
        for name, model in self._backbones:
            out = np.asarray(model(preprocess[name](batch.copy())))
            parts.append(out.reshape(out.shape[0], -1))  # row-major, channel-minor
        return np.concatenate(parts, axis=1)


def load_image(path: Path) -> np.ndarray:
    """Read, force RGB, resize to the fixed input size. Raises on bad files."""
    with Image.open(path) as img:
        rgb = img.convert("RGB").resize(INPUT_SIZE, Image.BILINEAR)
    return np.asarray(rgb, dtype=np.float32)


def read_label_map(path) -> dict[str, str]:
    """Parse a `filename,label` CSV into a dict (empty label = unlabeled)."""
    mapping: dict[str, str] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != ["filename", "label"]:
            raise ValueError(f"{path}: label map header must be 'filename,label'")
        for row in reader:
            if len(row) >= 2:
                mapping[row[0]] = row[1]
    return mapping


def _fmt(x) -> str:
    return f"{float(x):.9g}"


def extract_features(
    image_dir,
    spec: ExtractorSpec,
    label_map_file,
    out_path,
    batch_size: int = 8,
    extractor: FeatureExtractor | None = None,
) -> ExtractionReport:
    """Write one Feature CSV row per readable image in `image_dir`.

    Row ids are the image filenames; labels come from the map file (files
    missing from the map are left unlabeled, with a warning). Unreadable
    files are skipped with a warning and listed in `<out_path>.skipped.txt`.
    """
    image_dir = Path(image_dir)
    out_path = Path(out_path)
    labels = read_label_map(label_map_file)
    if extractor is None:
        extractor = FeatureExtractor(spec)

    files = sorted(p for p in image_dir.iterdir() if p.is_file())
    report = ExtractionReport(written=0)
    d = spec.feature_count

    with open(out_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "label"] + [f"f{i}" for i in range(d)])

        batch_files: list[Path] = []
        batch_arrays: list[np.ndarray] = []

        def flush():
            if not batch_files:
                return
            feats = extractor.features(np.stack(batch_arrays))
            for path, row in zip(batch_files, feats):
                name = path.name
                if name not in labels:
                    warnings.warn(f"{name}: not in label map, left unlabeled")
                writer.writerow([name, labels.get(name, "")] + [_fmt(v) for v in row])
                report.written += 1
            batch_files.clear()
            batch_arrays.clear()

        for path in files:
            try:
                array = load_image(path)
            except Exception as exc:
                warnings.warn(f"skipping unreadable image {path.name}: {exc}")
                report.skipped.append((path.name, str(exc)))
                continue
            batch_files.append(path)
            batch_arrays.append(array)
            if len(batch_files) >= batch_size:
                flush()
        flush()

    if report.skipped:
        sidecar = out_path.with_name(out_path.name + ".skipped.txt")
        sidecar.write_text(
            "".join(f"{name}\t{reason}\n" for name, reason in report.skipped),
            encoding="utf-8",
        )
    return report
