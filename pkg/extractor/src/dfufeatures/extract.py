"""Export penultimate-layer activations as the downstream feature CSV.

Extraction walks the manifest, loads each image, and records the
128-dimensional post-activation output of the dense feature layer, one
CSV row per image with the four-way label reconstructed from the
manifest's (infection, ischaemia) flags. With frozen weights the result
is a pure function of the image bytes. Unreadable images are skipped
with a logged warning and counted in the summary rather than aborting
the batch.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from .backbone import FeatureExtractorModel, build_model
from .data import (
    DEFAULT_IMAGE_SIZE,
    label_of_flags,
    load_image,
    read_manifest,
    write_feature_csv,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExtractSummary:
    written: int
    skipped: int


def extract_features(model: FeatureExtractorModel, image_dir, manifest_path,
                     out_csv, image_size: int = DEFAULT_IMAGE_SIZE
                     ) -> ExtractSummary:
    """One 128-dim feature row per readable manifest image."""
    image_dir = Path(image_dir)
    model.eval()
    rows, labels, skipped = [], [], 0
    with torch.no_grad():
        for filename, infection, ischaemia in read_manifest(manifest_path):
            path = image_dir / filename
            try:
                image = load_image(path, image_size)
            except (OSError, ValueError) as exc:
                logger.warning("skipping unreadable image %s: %s", path, exc)
                skipped += 1
                continue
            features = model.features(image.unsqueeze(0))[0].numpy()
            if not np.all(np.isfinite(features)) or not np.any(features):
                raise ValueError(
                    f"degenerate feature vector for {path}: downstream "
                    "amplitude encoding needs finite, non-zero features"
                )
            rows.append(features.astype(np.float64))
            labels.append(label_of_flags(infection, ischaemia))
    if not rows:
        raise ValueError("no readable images: nothing to extract")
    write_feature_csv(out_csv, np.stack(rows), labels)
    return ExtractSummary(written=len(rows), skipped=skipped)


def save_weights(model: FeatureExtractorModel, path) -> None:
    torch.save(model.state_dict(), path)


def load_weights(path, backbone: str = "xception-mini"
                 ) -> FeatureExtractorModel:
    model = build_model(backbone)
    model.load_state_dict(torch.load(path, weights_only=True))
    model.eval()
    return model
