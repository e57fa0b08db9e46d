"""Fine-tune a compact CNN on labeled wound images and export its
128-dimensional penultimate activations as feature CSVs."""

from .backbone import FeatureExtractorModel, build_model
from .data import (
    LABEL_NAMES,
    ManifestError,
    load_image,
    load_training_set,
    read_manifest,
)
from .extract import ExtractSummary, extract_features, load_weights, save_weights
from .finetune import ExtractorConfig, FinetuneHistory, finetune, weighted_bce

__version__ = "0.1.0"

__all__ = [
    "ExtractSummary",
    "ExtractorConfig",
    "FeatureExtractorModel",
    "FinetuneHistory",
    "LABEL_NAMES",
    "ManifestError",
    "build_model",
    "extract_features",
    "finetune",
    "load_image",
    "load_training_set",
    "load_weights",
    "read_manifest",
    "save_weights",
    "weighted_bce",
]
