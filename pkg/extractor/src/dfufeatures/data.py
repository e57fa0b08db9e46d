"""Label manifests, image preprocessing, and the feature-CSV writer.

The manifest is a CSV with header ``filename,infection,ischaemia`` and
one row per image; the two flag columns are 0/1. The four downstream
class names derive from the flag pair: (0,0) -> none, (1,0) ->
infection, (0,1) -> ischaemia, (1,1) -> both.

Images are loaded as RGB, resized to a square, and scaled to [-1, 1].
Feature CSVs use the consumer's schema — header ``f0..f127,label``,
floats serialized with repr() so a round trip is bit-exact — and are
written atomically (temp file + rename).
"""
from __future__ import annotations

import csv
import os
import tempfile
from pathlib import Path

import numpy as np
import torch
from PIL import Image

LABEL_NAMES = ("none", "infection", "ischaemia", "both")
LABEL_OF_FLAGS = {(0, 0): "none", (1, 0): "infection",
                  (0, 1): "ischaemia", (1, 1): "both"}
MANIFEST_HEADER = ["filename", "infection", "ischaemia"]
DEFAULT_IMAGE_SIZE = 299


class ManifestError(ValueError):
    """Malformed manifest or a manifest/image-directory mismatch."""


def read_manifest(path) -> list[tuple[str, int, int]]:
    """(filename, infection, ischaemia) per row, strictly validated."""
    rows = []
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None:
            raise ManifestError(f"empty manifest: {path}")
        if [h.strip().lower() for h in header] != MANIFEST_HEADER:
            raise ManifestError(
                f"manifest header must be {','.join(MANIFEST_HEADER)!r}, "
                f"got {','.join(header)!r}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise ManifestError(
                    f"expected 3 columns, got {len(row)} (line {lineno})")
            filename = row[0].strip()
            if not filename:
                raise ManifestError(f"empty filename (line {lineno})")
            flags = []
            for column, cell in zip(MANIFEST_HEADER[1:], row[1:]):
                cell = cell.strip()
                if cell not in ("0", "1"):
                    raise ManifestError(
                        f"{column} must be 0 or 1, got {cell!r} "
                        f"(line {lineno})"
                    )
                flags.append(int(cell))
            rows.append((filename, flags[0], flags[1]))
    if not rows:
        raise ManifestError(f"manifest has no data rows: {path}")
    return rows


def label_of_flags(infection: int, ischaemia: int) -> str:
    return LABEL_OF_FLAGS[(infection, ischaemia)]


def load_image(path, image_size: int = DEFAULT_IMAGE_SIZE) -> torch.Tensor:
    """(3, S, S) float32 tensor in [-1, 1]."""
    with Image.open(path) as image:
        rgb = image.convert("RGB").resize((image_size, image_size),
                                          Image.BILINEAR)
    pixels = np.asarray(rgb, dtype=np.float32) / 127.5 - 1.0
    return torch.from_numpy(pixels).permute(2, 0, 1).contiguous()


def load_training_set(image_dir, manifest_path,
                      image_size: int = DEFAULT_IMAGE_SIZE):
    """(images (N,3,S,S), targets (N,2) float32, filenames).

    Training is strict: a manifest row whose image is missing or
    unreadable is an error, not a skip.
    """
    image_dir = Path(image_dir)
    images, targets, names = [], [], []
    for filename, infection, ischaemia in read_manifest(manifest_path):
        path = image_dir / filename
        try:
            images.append(load_image(path, image_size))
        except (OSError, ValueError) as exc:
            raise ManifestError(
                f"manifest names an unreadable image: {path} ({exc})"
            ) from exc
        targets.append((float(infection), float(ischaemia)))
        names.append(filename)
    return torch.stack(images), torch.tensor(targets), names


def _atomic_write_text(path, text: str) -> None:
    path = Path(path)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def write_feature_csv(path, features: np.ndarray, labels: list[str]) -> None:
    """Rows of 128 repr()-serialized floats plus a label column."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[0] != len(labels):
        raise ValueError("features must be (n_rows, width) matching labels")
    width = features.shape[1]
    header = ",".join([f"f{j}" for j in range(width)] + ["label"])
    lines = [header]
    for row, label in zip(features, labels):
        lines.append(",".join([repr(float(v)) for v in row] + [label]))
    _atomic_write_text(path, "\n".join(lines) + "\n")
