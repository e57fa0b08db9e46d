"""Evaluation metrics: one-vs-rest AUC, per-class F1, confusion matrix.

AUC follows the Mann-Whitney statistic — the probability that a randomly
chosen positive outscores a randomly chosen negative, ties credited 0.5 —
computed from average ranks so it matches exhaustive pair counting exactly:

    AUC = (R_pos - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg)

where R_pos is the sum of average ranks of the positives. Classes absent
from the truth (or covering all of it) have no AUC and are excluded from
the macro average rather than filled in.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UndefinedMetricError
from .model import N_CLASSES, score_matrix


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks with ties sharing their group's average rank."""
    values = np.asarray(values, dtype=np.float64)
    _, inverse, counts = np.unique(values, return_inverse=True, return_counts=True)
    # Average rank of each tie group: midpoint of the positions it spans.
    highest = np.cumsum(counts)
    avg = highest - (counts - 1) / 2.0
    return avg[inverse]


def auc_ovr(scores: np.ndarray, positives: np.ndarray) -> float:
    """One-vs-rest AUC from scores and a boolean positive mask."""
    scores = np.asarray(scores, dtype=np.float64)
    positives = np.asarray(positives, dtype=bool)
    if scores.shape != positives.shape or scores.ndim != 1:
        raise ValueError("scores and positives must be 1-D arrays of equal length")
    n_pos = int(positives.sum())
    n_neg = positives.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError(
            "AUC is undefined without both positive and negative samples"
        )
    ranks = _average_ranks(scores)
    rank_sum = float(ranks[positives].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def f1_per_class(truth: np.ndarray, predictions: np.ndarray):
    """Per-class F1 = 2TP / (2TP + FP + FN); 0.0 when the denominator is 0.

    Returns (f1 array, zero-denominator mask) so callers can flag the
    convention rather than silently blend it into averages.
    """
    truth = np.asarray(truth)
    predictions = np.asarray(predictions)
    if truth.shape != predictions.shape:
        raise ValueError("truth and predictions must have the same length")
    f1 = np.zeros(N_CLASSES)
    zero_denom = np.zeros(N_CLASSES, dtype=bool)
    for c in range(N_CLASSES):
        tp = int(np.sum((truth == c) & (predictions == c)))
        fp = int(np.sum((truth != c) & (predictions == c)))
        fn = int(np.sum((truth == c) & (predictions != c)))
        denom = 2 * tp + fp + fn
        if denom == 0:
            zero_denom[c] = True
        else:
            f1[c] = 2.0 * tp / denom
    return f1, zero_denom


def confusion_matrix(truth: np.ndarray, predictions: np.ndarray) -> np.ndarray:
    """4x4 counts, rows = true class, columns = predicted class."""
    matrix = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    for t, p in zip(np.asarray(truth), np.asarray(predictions)):
        matrix[int(t), int(p)] += 1
    return matrix


@dataclass
class EvalReport:
    label_map: tuple
    per_class_auc: list          # float or None per class
    per_class_f1: list
    macro_auc: float | None
    macro_f1: float
    confusion: np.ndarray
    n_samples: int
    auc_excluded: list           # class names with undefined AUC
    f1_zero_denominator: list    # class names where F1 fell back to 0.0

    def to_record(self) -> dict:
        return {
            "label_map": list(self.label_map),
            "per_class_auc": self.per_class_auc,
            "per_class_f1": self.per_class_f1,
            "macro_auc": self.macro_auc,
            "macro_f1": self.macro_f1,
            "confusion": self.confusion.tolist(),
            "n_samples": self.n_samples,
            "auc_excluded": self.auc_excluded,
            "f1_zero_denominator": self.f1_zero_denominator,
        }

    def to_table(self) -> str:
        lines = [f"{'class':<12} {'auc':>8} {'f1':>8}"]
        for i, name in enumerate(self.label_map):
            auc = self.per_class_auc[i]
            auc_text = f"{auc:8.4f}" if auc is not None else f"{'--':>8}"
            lines.append(f"{name:<12} {auc_text} {self.per_class_f1[i]:8.4f}")
        macro_auc = (f"{self.macro_auc:8.4f}" if self.macro_auc is not None
                     else f"{'--':>8}")
        lines.append(f"{'macro':<12} {macro_auc} {self.macro_f1:8.4f}")
        lines.append("confusion (rows = truth, columns = predicted):")
        lines.append(" " * 12 + "".join(f"{n:>12}" for n in self.label_map))
        for i, name in enumerate(self.label_map):
            lines.append(f"{name:<12}"
                         + "".join(f"{c:>12d}" for c in self.confusion[i]))
        if self.auc_excluded:
            lines.append(
                "auc undefined for: " + ", ".join(self.auc_excluded)
                + " (excluded from macro)"
            )
        if self.f1_zero_denominator:
            lines.append(
                "f1 reported as 0.0 (no true or predicted samples) for: "
                + ", ".join(self.f1_zero_denominator)
            )
        lines.append(f"samples: {self.n_samples}")
        return "\n".join(lines)


def evaluate(model, dataset) -> EvalReport:
    """Score a dataset and compute AUC/F1/confusion against its labels."""
    if len(dataset) == 0:
        raise ValueError("cannot evaluate an empty dataset")
    scores = score_matrix(model, dataset.features)
    truth = dataset.labels.astype(np.int64)
    predictions = scores.argmax(axis=1)
    names = tuple(model.label_map)

    per_class_auc: list = []
    auc_excluded = []
    for c in range(N_CLASSES):
        positives = truth == c
        try:
            per_class_auc.append(float(auc_ovr(scores[:, c], positives)))
        except UndefinedMetricError:
            per_class_auc.append(None)
            auc_excluded.append(names[c])

    defined = [a for a in per_class_auc if a is not None]
    macro_auc = float(np.mean(defined)) if defined else None

    f1, zero_denom = f1_per_class(truth, predictions)
    return EvalReport(
        label_map=names,
        per_class_auc=per_class_auc,
        per_class_f1=[float(v) for v in f1],
        macro_auc=macro_auc,
        macro_f1=float(f1.mean()),
        confusion=confusion_matrix(truth, predictions),
        n_samples=len(dataset),
        auc_excluded=auc_excluded,
        f1_zero_denominator=[names[i] for i in range(N_CLASSES)
                             if zero_denom[i]],
    )
