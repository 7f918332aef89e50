"""Image directory -> Feature CSV via frozen pretrained convnets."""

from .extractor import (
    ARCHITECTURES,
    INPUT_SIZE,
    POOLINGS,
    ExtractionReport,
    ExtractorSpec,
    FeatureExtractor,
    extract_features,
    load_image,
    read_label_map,
)

__all__ = [
    "ARCHITECTURES",
    "INPUT_SIZE",
    "POOLINGS",
    "ExtractionReport",
    "ExtractorSpec",
    "FeatureExtractor",
    "extract_features",
    "load_image",
    "read_label_map",
]

__version__ = "0.1.0"
