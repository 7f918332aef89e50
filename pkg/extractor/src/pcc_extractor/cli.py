"""CLI: image directory + label map -> Feature CSV."""

from __future__ import annotations

import argparse
import os
import sys

from .extractor import ARCHITECTURES, POOLINGS, ExtractorSpec, extract_features


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="extract",
        description="Extract frozen-convnet features from an image directory into a Feature CSV.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("--images", required=True, help="directory of images")
    parser.add_argument("--labels", required=True, help="filename,label CSV")
    parser.add_argument("--arch", choices=ARCHITECTURES, default="vgg16")
    parser.add_argument("--pooling", choices=POOLINGS, default="none")
    parser.add_argument(
        "--weights",
        default="imagenet",
        help="'imagenet' for pretrained weights, 'none' for a random-weight smoke run",
    )
    parser.add_argument("--batch-size", type=int, default=8)
    parser.add_argument("--out", required=True, help="output feature CSV")
    return parser


def main(argv=None) -> int:
    os.environ.setdefault("TF_CPP_MIN_LOG_LEVEL", "2")
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    weights = None if args.weights.lower() == "none" else args.weights
    try:
        if weights is None:
            # random-weight smoke mode: pin the init so reruns still match
            import tensorflow as tf

            tf.keras.utils.set_random_seed(0)
        spec = ExtractorSpec(architecture=args.arch, pooling=args.pooling, weights=weights)
        report = extract_features(
            args.images, spec, args.labels, args.out, batch_size=args.batch_size
        )
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    print(
        f"wrote {args.out}: {report.written} rows x {spec.feature_count} features"
        + (f", {len(report.skipped)} skipped" if report.skipped else "")
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
