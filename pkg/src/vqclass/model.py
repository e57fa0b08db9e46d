"""One-vs-all ensemble of variational rotation/CNOT circuits.

Each of the four classes gets its own circuit: per layer, one general
rotation per qubit followed by a ring of CNOTs ``(q, q+1 mod n)``. The
classifier's score is the Pauli-Z expectation on qubit 0 (plus an
optional bias), and prediction is the argmax over the four scores.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .encoding import EncodingConfig, encode
from .statevector import StateVector, _apply_op, _expectation_z, _validate_op

CLASS_NAMES = ("none", "infection", "ischaemia", "both")
N_CLASSES = 4
DEFAULT_LAYERS = 6
INIT_ANGLE_SCALE = 0.1


@dataclass
class ModelParams:
    """Trainable rotation angles (n_layers, n_qubits, 3) plus optional bias."""

    angles: np.ndarray
    bias: float | None = None

    def __post_init__(self):
        self.angles = np.asarray(self.angles, dtype=np.float64)
        if self.angles.ndim != 3 or self.angles.shape[2] != 3:
            raise ValueError(
                f"angles must have shape (n_layers, n_qubits, 3), "
                f"got {self.angles.shape}"
            )
        if not np.all(np.isfinite(self.angles)):
            raise ValueError("angles must all be finite")
        if self.bias is not None:
            self.bias = float(self.bias)
            if not math.isfinite(self.bias):
                raise ValueError("bias must be finite")

    @property
    def n_layers(self) -> int:
        return self.angles.shape[0]

    @property
    def n_qubits(self) -> int:
        return self.angles.shape[1]

    def copy(self) -> "ModelParams":
        return ModelParams(self.angles.copy(), self.bias)


@dataclass
class EnsembleModel:
    """Four one-vs-all classifiers sharing one encoding and label order."""

    classifiers: list[ModelParams]
    encoding: EncodingConfig
    n_layers: int = DEFAULT_LAYERS
    label_map: tuple = CLASS_NAMES

    def __post_init__(self):
        self.label_map = tuple(self.label_map)
        if len(self.classifiers) != N_CLASSES:
            raise ValueError(f"exactly {N_CLASSES} classifiers required")
        if len(self.label_map) != N_CLASSES or len(set(self.label_map)) != N_CLASSES:
            raise ValueError(f"label_map must hold {N_CLASSES} distinct names")
        expected = (self.n_layers, self.encoding.n_qubits, 3)
        for i, c in enumerate(self.classifiers):
            if c.angles.shape != expected:
                raise ValueError(
                    f"classifier {i} angles have shape {c.angles.shape}, "
                    f"expected {expected}"
                )

    def copy(self) -> "EnsembleModel":
        return EnsembleModel(
            [c.copy() for c in self.classifiers],
            self.encoding,
            self.n_layers,
            self.label_map,
        )


def init_ensemble(
    encoding: EncodingConfig,
    n_layers: int = DEFAULT_LAYERS,
    seed: int = 0,
    with_bias: bool = False,
) -> EnsembleModel:
    """Seeded ensemble with angles uniform in [-0.1, 0.1] (near-identity start)."""
    if n_layers < 1:
        raise ValueError("n_layers must be at least 1")
    rng = np.random.default_rng(seed)
    shape = (n_layers, encoding.n_qubits, 3)
    classifiers = [
        ModelParams(
            rng.uniform(-INIT_ANGLE_SCALE, INIT_ANGLE_SCALE, size=shape),
            0.0 if with_bias else None,
        )
        for _ in range(N_CLASSES)
    ]
    return EnsembleModel(classifiers, encoding, n_layers)


def circuit_ops(angles: np.ndarray, n_qubits: int) -> list:
    """Gate list for one classifier circuit given its (L, Q, 3) angles."""
    ops = []
    for layer_angles in angles:
        for q in range(n_qubits):
            ops.append(("rot", (q,), tuple(layer_angles[q])))
        if n_qubits > 1:
            for q in range(n_qubits):
                ops.append(("cnot", (q, (q + 1) % n_qubits), ()))
    return ops


def layer(state: StateVector, layer_angles) -> StateVector:
    """Apply one variational layer (rotations then the CNOT ring) in place."""
    la = np.asarray(layer_angles, dtype=np.float64)
    if la.shape != (state.n_qubits, 3):
        raise ValueError(
            f"layer angles must have shape ({state.n_qubits}, 3), got {la.shape}"
        )
    for op in circuit_ops(la[None], state.n_qubits):
        _validate_op(op, state.n_qubits)
        _apply_op(state.amps, state.n_qubits, op)
    return state


def score_batch(angles: np.ndarray, bias, states: np.ndarray, n_qubits: int) -> np.ndarray:
    """Scores for a stack of encoded states, shape (N, 2**n_qubits).

    Does not mutate `states`. This is the one evaluation path: the
    single-sample :func:`score` runs through it with a stack of one.
    """
    work = states.copy()
    for op in circuit_ops(angles, n_qubits):
        _apply_op(work, n_qubits, op)
    out = _expectation_z(work, n_qubits, 0)
    if bias is not None:
        out = out + bias
    return out


def score(params: ModelParams, encoded: StateVector, n_layers: int) -> float:
    """One classifier's score on an encoded state; in [-1, 1] without bias."""
    if params.angles.shape[0] != n_layers:
        raise ValueError(
            f"params have {params.angles.shape[0]} layers, expected {n_layers}"
        )
    if params.n_qubits != encoded.n_qubits:
        raise ValueError(
            f"params are for {params.n_qubits} qubits, state has {encoded.n_qubits}"
        )
    return float(
        score_batch(params.angles, params.bias, encoded.amps[None, :], encoded.n_qubits)[0]
    )


def score_all(model: EnsembleModel, features) -> np.ndarray:
    """The four one-vs-all scores, in label_map order."""
    encoded = encode(features, model.encoding)
    return np.array([score(c, encoded, model.n_layers) for c in model.classifiers])


def score_matrix(model: EnsembleModel, features_matrix) -> np.ndarray:
    """Scores for many samples at once; shape (n_samples, 4)."""
    x = np.asarray(features_matrix, dtype=np.float64)
    states = np.stack([encode(row, model.encoding).amps for row in x])
    return np.stack(
        [
            score_batch(c.angles, c.bias, states, model.encoding.n_qubits)
            for c in model.classifiers
        ],
        axis=1,
    )


def predict(model: EnsembleModel, features) -> int:
    """Argmax class index; ties break toward the lowest index."""
    return int(np.argmax(score_all(model, features)))


def predict_batch(model: EnsembleModel, features_matrix) -> np.ndarray:
    return np.argmax(score_matrix(model, features_matrix), axis=1)
