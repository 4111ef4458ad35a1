"""Knit stitch pattern recognition toolkit.

Dataset manifests and stratified splitting, seeded image augmentation,
transfer-learning classifiers over pluggable backbones, weighted training
with early stopping, and a from-scratch evaluation suite.
"""

from knitstitch.dataset import (
    CLASS_NAMES,
    DatasetManifest,
    ImageSample,
    balanced_class_weights,
    compute_class_weights,
    load_manifest,
    scan_corpus,
    stratified_split,
    write_manifest,
)
from knitstitch.rng import RandomStream
from knitstitch.transforms import AugmentationConfig

__version__ = "0.1.0"

__all__ = [
    "CLASS_NAMES",
    "AugmentationConfig",
    "DatasetManifest",
    "ImageSample",
    "RandomStream",
    "balanced_class_weights",
    "compute_class_weights",
    "load_manifest",
    "scan_corpus",
    "stratified_split",
    "write_manifest",
]
