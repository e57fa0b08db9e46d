"""Classical-to-quantum feature encodings.

Two schemes:
    - ``amplitude``: the feature vector is padded to 2**n_qubits, L2
      normalized, and written directly as (real) amplitudes. Default
      configuration is 7 qubits / 128 inputs, which needs no padding.
    - ``angle``: feature j drives an RY rotation on qubit j starting
      from |0...0>; needs input_dim <= n_qubits.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError
from .statevector import MAX_QUBITS, StateVector, apply_ry, zero_state

SCHEMES = ("amplitude", "angle")

# Vectors with L2 norm below this are rejected as degenerate rather than
# silently renormalized into noise.
NORM_EPS = 1e-12


@dataclass(frozen=True)
class EncodingConfig:
    scheme: str = "amplitude"
    n_qubits: int = 7
    input_dim: int = 128
    pad_value: float = 0.0

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown encoding scheme {self.scheme!r}")
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise ValueError(f"n_qubits must be in 1..{MAX_QUBITS}")
        if self.input_dim < 1:
            raise ValueError("input_dim must be at least 1")
        if self.scheme == "amplitude" and self.input_dim > 2**self.n_qubits:
            raise ValueError(
                f"amplitude encoding needs input_dim <= 2**n_qubits "
                f"({self.input_dim} > {2**self.n_qubits})"
            )
        if self.scheme == "angle" and self.input_dim > self.n_qubits:
            raise ValueError(
                f"angle encoding needs input_dim <= n_qubits "
                f"({self.input_dim} > {self.n_qubits})"
            )
        if not np.isfinite(self.pad_value):
            raise ValueError("pad_value must be finite")


def encode(features, config: EncodingConfig) -> StateVector:
    """Map a feature vector to a normalized initial state."""
    x = np.asarray(features, dtype=np.float64)
    if x.shape != (config.input_dim,):
        raise ValueError(
            f"expected {config.input_dim} features, got shape {x.shape}"
        )
    if not np.all(np.isfinite(x)):
        raise ValueError("features must all be finite")

    if config.scheme == "amplitude":
        padded = np.full(2**config.n_qubits, config.pad_value, dtype=np.float64)
        padded[: config.input_dim] = x
        norm = np.sqrt(np.sum(padded * padded))
        if norm < NORM_EPS:
            raise DegenerateInputError(
                "cannot amplitude-encode a (near-)zero feature vector"
            )
        return StateVector(config.n_qubits, padded / norm)

    state = zero_state(config.n_qubits)
    for qubit, angle in enumerate(x):
        apply_ry(state, qubit, float(angle))
    return state
