"""Dataset ingestion, splits, synthetic data, and model/report persistence.

File formats owned by this module
---------------------------------

Feature CSV (the interchange format between the feature extractor and
this package): UTF-8, ``.`` decimal separator, required header
``f0,...,f{D-1},label``, one sample per row. Labels are matched
case-insensitively against {none, control, infection, ischaemia, both};
``control`` is stored as ``none``. Prediction inputs may omit the final
``label`` column.

Epoch log: one JSON object per line with keys
``epoch, train_loss, train_acc, val_loss, val_acc`` (the last two are
``null`` when no validation split was given).

Model file: a single JSON document::

    {"format": "vqclass-ensemble", "version": 1,
     "encoding": {"scheme", "n_qubits", "input_dim", "pad_value"},
     "n_layers": ..., "label_map": [...], "seed_lineage": {...},
     "classifiers": [{"angles": [[[...]]], "bias": ...}, x4]}

Floats are serialized by Python's shortest round-trip ``repr``, so a
save/load cycle reproduces every parameter bit for bit.

Evaluation record: the dict produced by ``EvalReport.to_record`` written
as indented JSON.

All writes go to a temporary file in the destination directory and are
renamed into place, so failures never leave partial output.

Randomness throughout uses ``numpy.random.default_rng`` (the PCG64
generator), so splits and synthetic datasets reproduce across platforms
for a fixed seed.
"""
from __future__ import annotations

import csv
import json
import math
import os
import tempfile
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .encoding import EncodingConfig
from .errors import CsvFormatError, ModelFormatError, ModelVersionError
from .model import CLASS_NAMES, EnsembleModel, ModelParams, N_CLASSES

LABEL_ALIASES = {"control": "none"}
_LABEL_INDEX = {name: i for i, name in enumerate(CLASS_NAMES)}

MODEL_FORMAT = "vqclass-ensemble"
MODEL_VERSION = 1


class StratificationWarning(UserWarning):
    """A label class had fewer samples than split parts; assignment degraded
    to best effort."""


class Sample(NamedTuple):
    features: np.ndarray
    label: str


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable feature matrix with integer labels.

    ``features`` is ``(n, feature_dim)`` float64 and ``labels`` is ``(n,)``
    int64 indexing into the canonical class order. Loaders and generators
    always produce at least one sample; only ``split`` may hand back an
    empty part (an empty validation or test fraction).
    """

    features: np.ndarray
    labels: np.ndarray
    provenance: str = ""

    def __post_init__(self):
        features = np.array(self.features, dtype=np.float64)
        labels = np.array(self.labels, dtype=np.int64)
        if features.ndim != 2:
            raise ValueError(f"features must be 2-D, got shape {features.shape}")
        if labels.shape != (features.shape[0],):
            raise ValueError("labels length must match the number of feature rows")
        if not np.all(np.isfinite(features)):
            raise ValueError("features must be finite")
        if labels.size and (labels.min() < 0 or labels.max() >= N_CLASSES):
            raise ValueError(f"labels must be in 0..{N_CLASSES - 1}")
        features.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return self.features.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.features.shape[1]

    @property
    def samples(self) -> list:
        return [Sample(self.features[i], CLASS_NAMES[self.labels[i]])
                for i in range(len(self))]

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=N_CLASSES)


# --- atomic writes ----------------------------------------------------------

def _atomic_write_text(path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."),
                               prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(record, path) -> None:
    _atomic_write_text(path, json.dumps(record, indent=2) + "\n")


def write_epoch_log(path, records) -> None:
    """One JSON object per line; see the module docstring for the keys."""
    _atomic_write_text(path, "".join(json.dumps(r) + "\n" for r in records))


# --- CSV --------------------------------------------------------------------

def _parse_feature_row(row, dim, lineno):
    values = np.empty(dim, dtype=np.float64)
    for j in range(dim):
        token = row[j].strip()
        try:
            value = float(token)
        except ValueError:
            raise CsvFormatError(f"non-numeric feature value {token!r}",
                                 line=lineno, column=f"f{j}") from None
        if not math.isfinite(value):
            raise CsvFormatError(f"non-finite feature value {token!r}",
                                 line=lineno, column=f"f{j}")
        values[j] = value
    return values


def _parse_label(token, lineno):
    name = LABEL_ALIASES.get(token.strip().lower(), token.strip().lower())
    if name not in _LABEL_INDEX:
        raise CsvFormatError(f"unknown label {token.strip()!r}",
                             line=lineno, column="label")
    return _LABEL_INDEX[name]


def _read_rows(path, require_label):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise CsvFormatError("empty file: missing header", line=1) from None
        has_label = header and header[-1] == "label"
        if require_label and not has_label:
            raise CsvFormatError("header must end with a 'label' column", line=1)
        dim = len(header) - 1 if has_label else len(header)
        if dim < 1 or header[:dim] != [f"f{j}" for j in range(dim)]:
            raise CsvFormatError(
                "header must be f0,...,f{D-1}" + (",label" if require_label else "[,label]"),
                line=1)
        width = dim + 1 if has_label else dim
        features, labels = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != width:
                raise CsvFormatError(
                    f"expected {width} fields, got {len(row)}", line=lineno)
            features.append(_parse_feature_row(row, dim, lineno))
            if has_label:
                labels.append(_parse_label(row[-1], lineno))
    if not features:
        raise CsvFormatError("no data rows", line=2)
    features = np.array(features, dtype=np.float64)
    labels = np.array(labels, dtype=np.int64) if has_label else None
    return features, labels


def load_csv(path) -> Dataset:
    """Read a labeled feature CSV; raises CsvFormatError naming line/column."""
    features, labels = _read_rows(path, require_label=True)
    return Dataset(features, labels, provenance=str(path))


def load_feature_csv(path):
    """Read a feature CSV that may omit labels; returns (features, labels|None)."""
    return _read_rows(path, require_label=False)


def save_csv(dataset: Dataset, path) -> None:
    """Write a Dataset in the interchange format; round-trips bit-exactly."""
    dim = dataset.feature_dim
    lines = [",".join([f"f{j}" for j in range(dim)] + ["label"])]
    for i in range(len(dataset)):
        row = [repr(float(v)) for v in dataset.features[i]]
        row.append(CLASS_NAMES[dataset.labels[i]])
        lines.append(",".join(row))
    _atomic_write_text(path, "\n".join(lines) + "\n")


# --- splits -----------------------------------------------------------------

def split(dataset: Dataset, fractions, seed: int):
    """Stratified (train, validation, test) partition, deterministic in seed.

    Within each class, rounding leftovers go to the parts with the largest
    fractional quota (ties to the earlier part). A class with fewer samples
    than nonzero fractions triggers a StratificationWarning and best-effort
    assignment.
    """
    fracs = tuple(float(f) for f in fractions)
    if len(fracs) != 3:
        raise ValueError("fractions must have exactly 3 entries")
    if any(not math.isfinite(f) or f < 0 for f in fracs):
        raise ValueError("fractions must be finite and non-negative")
    if abs(sum(fracs) - 1.0) > 1e-9:
        raise ValueError(f"fractions must sum to 1, got {sum(fracs)!r}")

    rng = np.random.default_rng(seed)
    n_parts = sum(1 for f in fracs if f > 0)
    part_indices = [[], [], []]
    starved = []
    for c in range(N_CLASSES):
        class_rows = np.nonzero(dataset.labels == c)[0]
        n_c = class_rows.size
        if n_c == 0:
            continue
        if n_c < n_parts:
            starved.append(CLASS_NAMES[c])
        shuffled = rng.permutation(class_rows)
        quotas = [f * n_c for f in fracs]
        counts = [int(math.floor(q)) for q in quotas]
        remainders = [q - k for q, k in zip(quotas, counts)]
        for p in sorted(range(3), key=lambda p: (-remainders[p], p))[:n_c - sum(counts)]:
            counts[p] += 1
        start = 0
        for p in range(3):
            part_indices[p].extend(shuffled[start:start + counts[p]].tolist())
            start += counts[p]

    if starved:
        warnings.warn(
            "classes with fewer samples than split parts: "
            + ", ".join(starved) + "; assignment degraded to best effort",
            StratificationWarning, stacklevel=2)

    parts = []
    for indices, name in zip(part_indices, ("train", "validation", "test")):
        sel = np.array(sorted(indices), dtype=np.int64)
        parts.append(Dataset(dataset.features[sel], dataset.labels[sel],
                             provenance=f"{dataset.provenance}[{name} split, seed={seed}]"))
    return tuple(parts)


# --- synthetic data ---------------------------------------------------------

def blob_centers(feature_dim: int) -> np.ndarray:
    """Four mutually distant unit-norm centers, none antipodal.

    Amplitude encoding cannot distinguish x from -x (a global sign leaves
    every measured quantity unchanged), so opposite-sign centers would be
    unlearnable; these layouts keep all pairwise angles strictly inside
    (0, pi). For feature_dim >= 4 the centers sit on coordinate axes
    spread evenly across the vector — under amplitude encoding that
    spreads the classes over the whole register address space instead of
    parking them all in the low-order corner, keeping the four one-vs-all
    problems symmetric.
    """
    if feature_dim < 2:
        raise ValueError("feature_dim must be at least 2")
    centers = np.zeros((N_CLASSES, feature_dim))
    if feature_dim >= 4:
        for c in range(N_CLASSES):
            centers[c, (c * feature_dim) // 4] = 1.0
    elif feature_dim == 3:
        centers[:, :] = np.array(
            [[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]],
            dtype=np.float64) / math.sqrt(3.0)
    else:
        angles = np.deg2rad([0.0, 45.0, 90.0, 135.0])
        centers[:, 0] = np.cos(angles)
        centers[:, 1] = np.sin(angles)
    return centers


def synth_blobs(n_per_class: int, feature_dim: int, separation: float,
                seed: int) -> Dataset:
    """Four unit-variance Gaussian clusters at blob_centers * separation."""
    if n_per_class < 1:
        raise ValueError("n_per_class must be at least 1")
    if not math.isfinite(separation) or separation <= 0:
        raise ValueError("separation must be finite and positive")
    centers = blob_centers(feature_dim) * separation
    rng = np.random.default_rng(seed)
    blocks = [centers[c] + rng.standard_normal((n_per_class, feature_dim))
              for c in range(N_CLASSES)]
    labels = np.repeat(np.arange(N_CLASSES), n_per_class)
    provenance = (f"synth_blobs(n_per_class={n_per_class}, "
                  f"feature_dim={feature_dim}, separation={separation}, "
                  f"seed={seed})")
    return Dataset(np.concatenate(blocks), labels, provenance=provenance)


# --- model persistence ------------------------------------------------------

def save_model(model: EnsembleModel, path, seed_lineage=None) -> None:
    """Write the versioned model file; floats round-trip bit-exactly."""
    document = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "encoding": {
            "scheme": model.encoding.scheme,
            "n_qubits": model.encoding.n_qubits,
            "input_dim": model.encoding.input_dim,
            "pad_value": model.encoding.pad_value,
        },
        "n_layers": model.n_layers,
        "label_map": list(model.label_map),
        "seed_lineage": dict(seed_lineage) if seed_lineage else {},
        "classifiers": [
            {"angles": params.angles.tolist(),
             "bias": None if params.bias is None else float(params.bias)}
            for params in model.classifiers
        ],
    }
    _atomic_write_text(path, json.dumps(document, indent=2) + "\n")


def load_model(path) -> EnsembleModel:
    """Read a model file; raises ModelVersionError / ModelFormatError."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"model file is not valid JSON: {exc}") from exc
    if not isinstance(document, dict) or document.get("format") != MODEL_FORMAT:
        raise ModelFormatError(
            f"missing or unrecognized format tag (expected {MODEL_FORMAT!r})")
    if document.get("version") != MODEL_VERSION:
        raise ModelVersionError(
            f"unsupported model file version {document.get('version')!r} "
            f"(this build reads version {MODEL_VERSION})")
    try:
        encoding = EncodingConfig(**document["encoding"])
        classifiers = [
            ModelParams(
                angles=np.asarray(entry["angles"], dtype=np.float64),
                bias=None if entry["bias"] is None else float(entry["bias"]))
            for entry in document["classifiers"]
        ]
        return EnsembleModel(
            classifiers=classifiers,
            encoding=encoding,
            n_layers=int(document["n_layers"]),
            label_map=tuple(document["label_map"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"malformed model file: {exc}") from exc
