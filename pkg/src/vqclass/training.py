"""Margin-loss training of the ensemble via parameter-shift gradients.

The multi-class margin loss for a sample with true class y is

    L = weight * sum_{i != y} max(0, s_i - s_y + margin)

with all four classifier scores interacting through the hinge. Gradients
flow to each circuit's angles by the parameter-shift rule (two shifted
score evaluations per angle) chain-ruled through the hinge, whose
subgradient at the kink is taken as 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .encoding import encode
from .errors import TrainingDivergedError
from .model import EnsembleModel, ModelParams, N_CLASSES, score, score_batch
from .optim import OPTIMIZER_NAMES, make_optimizer

SHIFT = math.pi / 2


@dataclass(frozen=True)
class EarlyStopping:
    patience: int
    min_delta: float = 0.0

    def __post_init__(self):
        if self.patience < 1:
            raise ValueError("patience must be at least 1")
        if not math.isfinite(self.min_delta) or self.min_delta < 0:
            raise ValueError("min_delta must be finite and non-negative")


@dataclass(frozen=True)
class TrainConfig:
    margin: float = 0.15
    learning_rate: float = 0.01
    batch_size: int = 16
    max_epochs: int = 100
    seed: int = 0
    optimizer: str = "adam"
    early_stopping: EarlyStopping | None = None
    class_weights: tuple = (1.0, 1.0, 1.0, 1.0)

    def __post_init__(self):
        if not math.isfinite(self.margin) or self.margin < 0:
            raise ValueError("margin must be finite and non-negative")
        if not math.isfinite(self.learning_rate) or self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")
        if self.max_epochs < 0:
            raise ValueError("max_epochs must be non-negative")
        if self.optimizer not in OPTIMIZER_NAMES:
            raise ValueError(
                f"unknown optimizer {self.optimizer!r}; choose from {OPTIMIZER_NAMES}"
            )
        weights = tuple(float(w) for w in self.class_weights)
        if len(weights) != N_CLASSES:
            raise ValueError(f"class_weights must hold {N_CLASSES} values")
        if any(not math.isfinite(w) or w <= 0 for w in weights):
            raise ValueError("class_weights must be finite and positive")
        object.__setattr__(self, "class_weights", weights)


@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    train_acc: float
    val_loss: float | None
    val_acc: float | None

    def to_record(self) -> dict:
        return {
            "epoch": self.epoch,
            "train_loss": self.train_loss,
            "train_acc": self.train_acc,
            "val_loss": self.val_loss,
            "val_acc": self.val_acc,
        }


@dataclass
class TrainReport:
    epochs: list = field(default_factory=list)
    stopped_epoch: int = 0
    best_epoch: int = 0

    def to_records(self) -> list:
        return [e.to_record() for e in self.epochs]


# --- loss -------------------------------------------------------------------

def margin_loss(scores, true_class: int, margin: float, weight: float = 1.0) -> float:
    """weight * sum over rival classes of max(0, s_i - s_y + margin).

    Each hinge term is evaluated as s_i - (s_y - margin), i.e. against the
    hoisted threshold, matching hand arithmetic digit for digit.
    """
    s = np.asarray(scores, dtype=np.float64)
    if s.shape != (N_CLASSES,):
        raise ValueError(f"expected {N_CLASSES} scores, got shape {s.shape}")
    if not 0 <= int(true_class) < N_CLASSES:
        raise ValueError(f"true_class must be in 0..{N_CLASSES - 1}, got {true_class}")
    if not math.isfinite(margin) or margin < 0:
        raise ValueError("margin must be finite and non-negative")
    diffs = s - (s[true_class] - margin)
    diffs[true_class] = 0.0
    return float(weight * np.maximum(diffs, 0.0).sum())


def hinge_coefficients(scores, true_class: int, margin: float, weight: float = 1.0) -> np.ndarray:
    """dL/ds_i of the margin loss; the kink contributes subgradient 0."""
    s = np.asarray(scores, dtype=np.float64)
    diffs = s - (s[true_class] - margin)
    diffs[true_class] = 0.0
    active = diffs > 0.0
    coeffs = np.where(active, weight, 0.0)
    coeffs[true_class] = -weight * active.sum()
    return coeffs


def _loss_terms(scores: np.ndarray, labels: np.ndarray, margin: float, class_weights: np.ndarray):
    """Vectorized per-sample losses and dL/ds coefficients for (N, 4) scores."""
    rows = np.arange(scores.shape[0])
    diffs = scores - (scores[rows, labels] - margin)[:, None]
    diffs[rows, labels] = 0.0
    w = class_weights[labels]
    losses = w * np.maximum(diffs, 0.0).sum(axis=1)
    active = diffs > 0.0
    coeffs = np.where(active, w[:, None], 0.0)
    coeffs[rows, labels] = -w * active.sum(axis=1)
    return losses, coeffs


# --- gradients --------------------------------------------------------------

def score_shift_gradient(params: ModelParams, encoded, n_layers: int) -> np.ndarray:
    """d(score)/d(angles) via two shifted evaluations per angle."""
    base = encoded.amps[None, :]
    nq = encoded.n_qubits
    if params.angles.shape[0] != n_layers:
        raise ValueError(
            f"params have {params.angles.shape[0]} layers, expected {n_layers}"
        )
    grad = np.zeros_like(params.angles)
    shifted = params.angles.copy()
    for idx in np.ndindex(params.angles.shape):
        orig = params.angles[idx]
        shifted[idx] = orig + SHIFT
        plus = score_batch(shifted, None, base, nq)[0]
        shifted[idx] = orig - SHIFT
        minus = score_batch(shifted, None, base, nq)[0]
        shifted[idx] = orig
        grad[idx] = (plus - minus) / 2.0
    return grad


def parameter_shift_grad(params: ModelParams, encoded, coeff: float, n_layers: int):
    """Gradient of (coeff * score) as (angle_grad, bias_grad).

    `coeff` is the hinge chain term dL/ds for this classifier. A zero
    coefficient short-circuits to an exactly zero gradient.
    """
    if coeff == 0.0:
        return np.zeros_like(params.angles), 0.0
    angle_grad = coeff * score_shift_gradient(params, encoded, n_layers)
    bias_grad = coeff if params.bias is not None else 0.0
    return angle_grad, bias_grad


def ensemble_loss_gradient(model: EnsembleModel, features, true_class: int,
                           margin: float, weight: float = 1.0):
    """Loss and per-classifier (angle_grad, bias_grad) for one sample."""
    encoded = encode(features, model.encoding)
    scores = np.array([score(c, encoded, model.n_layers) for c in model.classifiers])
    loss = margin_loss(scores, true_class, margin, weight)
    coeffs = hinge_coefficients(scores, true_class, margin, weight)
    grads = [
        parameter_shift_grad(c, encoded, float(coeffs[i]), model.n_layers)
        for i, c in enumerate(model.classifiers)
    ]
    return loss, grads


def finite_difference_loss_gradient(model: EnsembleModel, features, true_class: int,
                                    margin: float, weight: float = 1.0,
                                    step: float = 1e-5):
    """Central-difference angle gradients of the margin loss.

    Verification oracle for the shift rule; runs through the public
    score path rather than any gradient code.
    """
    encoded = encode(features, model.encoding)
    base = [score(c, encoded, model.n_layers) for c in model.classifiers]
    grads = []
    for i, params in enumerate(model.classifiers):
        g = np.zeros_like(params.angles)
        work = params.copy()
        for idx in np.ndindex(params.angles.shape):
            orig = params.angles[idx]
            work.angles[idx] = orig + step
            s_plus = score(work, encoded, model.n_layers)
            work.angles[idx] = orig - step
            s_minus = score(work, encoded, model.n_layers)
            work.angles[idx] = orig
            shifted_scores = list(base)
            shifted_scores[i] = s_plus
            loss_plus = margin_loss(shifted_scores, true_class, margin, weight)
            shifted_scores[i] = s_minus
            loss_minus = margin_loss(shifted_scores, true_class, margin, weight)
            g[idx] = (loss_plus - loss_minus) / (2.0 * step)
        grads.append(g)
    return grads


# --- training loop ----------------------------------------------------------

def _score_stack(classifiers, states: np.ndarray, n_qubits: int) -> np.ndarray:
    return np.stack(
        [score_batch(c.angles, c.bias, states, n_qubits) for c in classifiers],
        axis=1,
    )


def _split_stats(classifiers, states, labels, margin, class_weights, n_qubits):
    scores = _score_stack(classifiers, states, n_qubits)
    losses, _ = _loss_terms(scores, labels, margin, class_weights)
    acc = float((scores.argmax(axis=1) == labels).mean())
    return float(losses.mean()), acc


def _train_batch(model, opts, bias_opts, bstates, blabels, class_weights, config):
    """One optimizer step over a mini-batch; returns the pre-step batch loss."""
    nq = model.encoding.n_qubits
    n_batch = len(blabels)
    scores = _score_stack(model.classifiers, bstates, nq)
    losses, coeffs = _loss_terms(scores, blabels, config.margin, class_weights)
    loss = float(losses.mean())
    if not math.isfinite(loss):
        return loss
    for i, params in enumerate(model.classifiers):
        ci = coeffs[:, i]
        rows = np.nonzero(ci)[0]
        grad = np.zeros_like(params.angles)
        if rows.size:
            sub = bstates[rows]
            cf = ci[rows]
            shifted = params.angles.copy()
            for idx in np.ndindex(params.angles.shape):
                orig = params.angles[idx]
                shifted[idx] = orig + SHIFT
                plus = score_batch(shifted, None, sub, nq)
                shifted[idx] = orig - SHIFT
                minus = score_batch(shifted, None, sub, nq)
                shifted[idx] = orig
                grad[idx] = float((cf * (plus - minus)).sum()) / (2.0 * n_batch)
        opts[i].step(params.angles, grad)
        if params.bias is not None:
            b = np.array([params.bias])
            bias_opts[i].step(b, np.array([float(ci.sum()) / n_batch]))
            params.bias = float(b[0])
    return loss


def _encode_split(dataset, encoding):
    if dataset.feature_dim != encoding.input_dim:
        raise ValueError(
            f"dataset feature_dim {dataset.feature_dim} does not match "
            f"encoding input_dim {encoding.input_dim}"
        )
    states = np.stack([encode(row, encoding).amps for row in dataset.features])
    return states, dataset.labels.astype(np.int64)


def train(train_set, val_set, config: TrainConfig, initial: EnsembleModel):
    """Mini-batch training; returns (trained model, per-epoch report).

    Fully deterministic given `config.seed`: shuffling and gradient
    accumulation follow a fixed order. With early stopping enabled the
    best-validation-epoch snapshot is returned; otherwise the final model.
    The `initial` model is left untouched.
    """
    if len(train_set) == 0:
        raise ValueError("training dataset is empty")
    if val_set is not None and len(val_set) == 0:
        raise ValueError("validation dataset is empty")
    if config.early_stopping is not None and val_set is None:
        raise ValueError("early stopping requires a validation dataset")

    model = initial.copy()
    report = TrainReport()
    if config.max_epochs == 0:
        return model, report

    nq = model.encoding.n_qubits
    class_weights = np.asarray(config.class_weights, dtype=np.float64)
    states, labels = _encode_split(train_set, model.encoding)
    if val_set is not None:
        val_states, val_labels = _encode_split(val_set, model.encoding)

    opts = [make_optimizer(config.optimizer, config.learning_rate)
            for _ in model.classifiers]
    bias_opts = [make_optimizer(config.optimizer, config.learning_rate)
                 if c.bias is not None else None for c in model.classifiers]
    rng = np.random.default_rng(config.seed)

    es = config.early_stopping
    best_loss = math.inf
    best_epoch = 0
    best_snapshot = None
    bad_epochs = 0

    for epoch in range(1, config.max_epochs + 1):
        perm = rng.permutation(len(labels))
        for batch_index, start in enumerate(range(0, len(labels), config.batch_size)):
            batch = perm[start:start + config.batch_size]
            loss = _train_batch(model, opts, bias_opts, states[batch],
                                labels[batch], class_weights, config)
            if not math.isfinite(loss):
                raise TrainingDivergedError("non-finite training loss",
                                            epoch, batch_index)
        train_loss, train_acc = _split_stats(
            model.classifiers, states, labels, config.margin, class_weights, nq)
        val_loss = val_acc = None
        if val_set is not None:
            val_loss, val_acc = _split_stats(
                model.classifiers, val_states, val_labels,
                config.margin, class_weights, nq)
        report.epochs.append(EpochStats(epoch, train_loss, train_acc,
                                        val_loss, val_acc))
        report.stopped_epoch = epoch

        if es is not None:
            if val_loss < best_loss - es.min_delta:
                best_loss = val_loss
                best_epoch = epoch
                best_snapshot = model.copy()
                bad_epochs = 0
            else:
                bad_epochs += 1
                if bad_epochs >= es.patience:
                    break

    if es is not None:
        report.best_epoch = best_epoch
        return best_snapshot, report

    monitored = [e.val_loss if val_set is not None else e.train_loss
                 for e in report.epochs]
    report.best_epoch = 1 + int(np.argmin(monitored))
    return model, report
