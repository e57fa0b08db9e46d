"""Dense statevector simulation of small rotation/CNOT circuits.

Conventions:
    - Qubit 0 is the most significant bit of the basis index, so on two
      qubits the state |10> (qubit 0 set) lives at amplitude index 2.
    - Gate functions mutate the amplitude array in place and return the
      same ``StateVector`` so calls can be chained.
    - Global phase is not normalized away; use :func:`fidelity` for
      phase-insensitive comparisons.

Circuits are plain lists of ops ``(name, qubits, params)``, e.g.
``("rot", (0,), (0.1, 0.2, 0.3))`` or ``("cnot", (0, 1), ())``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import UnsupportedSizeError

MAX_QUBITS = 12
ORACLE_MAX_QUBITS = 3


class RotationAngles(NamedTuple):
    phi: float
    theta: float
    omega: float


@dataclass
class StateVector:
    n_qubits: int
    amps: np.ndarray

    def __post_init__(self):
        if not 1 <= int(self.n_qubits) <= MAX_QUBITS:
            raise ValueError(
                f"n_qubits must be in 1..{MAX_QUBITS}, got {self.n_qubits}"
            )
        self.amps = np.ascontiguousarray(self.amps, dtype=np.complex128)
        if self.amps.shape != (2**self.n_qubits,):
            raise ValueError(
                f"amplitude array must have length {2**self.n_qubits}, "
                f"got shape {self.amps.shape}"
            )

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amps.copy())

    def norm_squared(self) -> float:
        return float(np.sum(self.amps.real**2 + self.amps.imag**2))

    def probabilities(self) -> np.ndarray:
        return self.amps.real**2 + self.amps.imag**2


def zero_state(n_qubits: int) -> StateVector:
    """|0...0> on `n_qubits` qubits."""
    return basis_state(n_qubits, 0)


def basis_state(n_qubits: int, index: int) -> StateVector:
    amps = np.zeros(2**n_qubits, dtype=np.complex128)
    amps[index] = 1.0
    return StateVector(n_qubits, amps)


# --- 2x2 gate matrices ------------------------------------------------------

def rx_matrix(angle: float) -> np.ndarray:
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def ry_matrix(angle: float) -> np.ndarray:
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


def rz_matrix(angle: float) -> np.ndarray:
    p = np.exp(-0.5j * angle)
    return np.array([[p, 0.0], [0.0, np.conj(p)]])


def rot_matrix(phi: float, theta: float, omega: float) -> np.ndarray:
    """Closed form of RZ(omega) @ RY(theta) @ RZ(phi)."""
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array(
        [
            [np.exp(-0.5j * (phi + omega)) * c, -np.exp(0.5j * (phi - omega)) * s],
            [np.exp(-0.5j * (phi - omega)) * s, np.exp(0.5j * (phi + omega)) * c],
        ]
    )


_MATRIX_FNS = {"rx": rx_matrix, "ry": ry_matrix, "rz": rz_matrix, "rot": rot_matrix}


# --- in-place kernels -------------------------------------------------------
# All kernels accept a C-contiguous complex array of shape (..., 2**n_qubits)
# so a single code path serves one state or a whole batch of states.

def _apply_matrix2(amps: np.ndarray, n_qubits: int, qubit: int, mat: np.ndarray) -> None:
    lead = amps.ndim - 1
    a = amps.reshape(amps.shape[:-1] + (2,) * n_qubits)
    i0 = (slice(None),) * (lead + qubit) + (0, Ellipsis)
    i1 = (slice(None),) * (lead + qubit) + (1, Ellipsis)
    x0 = a[i0].copy()
    x1 = a[i1]
    a[i0] = mat[0, 0] * x0 + mat[0, 1] * x1
    a[i1] = mat[1, 0] * x0 + mat[1, 1] * x1


def _apply_cnot(amps: np.ndarray, n_qubits: int, control: int, target: int) -> None:
    lead = amps.ndim - 1
    a = amps.reshape(amps.shape[:-1] + (2,) * n_qubits)
    sel = [slice(None)] * (lead + n_qubits)
    sel[lead + control] = 1
    sel[lead + target] = 0
    i10 = tuple(sel)
    sel[lead + target] = 1
    i11 = tuple(sel)
    tmp = a[i10].copy()
    a[i10] = a[i11]
    a[i11] = tmp


def _apply_op(amps: np.ndarray, n_qubits: int, op) -> None:
    name, qubits, params = op
    if name == "cnot":
        _apply_cnot(amps, n_qubits, qubits[0], qubits[1])
    else:
        _apply_matrix2(amps, n_qubits, qubits[0], _MATRIX_FNS[name](*params))


def _expectation_z(amps: np.ndarray, n_qubits: int, qubit: int):
    """<Z> on `qubit` for amplitudes shaped (..., 2**n_qubits)."""
    bit = (np.arange(2**n_qubits) >> (n_qubits - 1 - qubit)) & 1
    signs = 1.0 - 2.0 * bit
    probs = amps.real**2 + amps.imag**2
    return (probs * signs).sum(axis=-1)


# --- public single-state API ------------------------------------------------

def _check_qubit(state: StateVector, qubit: int) -> None:
    if not 0 <= qubit < state.n_qubits:
        raise ValueError(
            f"qubit index {qubit} out of range for {state.n_qubits} qubits"
        )


def _check_angles(*angles: float) -> None:
    for a in angles:
        if not math.isfinite(a):
            raise ValueError(f"rotation angle must be finite, got {a!r}")


def apply_rx(state: StateVector, qubit: int, angle: float) -> StateVector:
    """X-axis rotation exp(-i*angle*X/2) on `qubit`, in place."""
    _check_qubit(state, qubit)
    _check_angles(angle)
    _apply_matrix2(state.amps, state.n_qubits, qubit, rx_matrix(angle))
    return state


def apply_ry(state: StateVector, qubit: int, angle: float) -> StateVector:
    """Y-axis rotation exp(-i*angle*Y/2) on `qubit`, in place."""
    _check_qubit(state, qubit)
    _check_angles(angle)
    _apply_matrix2(state.amps, state.n_qubits, qubit, ry_matrix(angle))
    return state


def apply_rz(state: StateVector, qubit: int, angle: float) -> StateVector:
    """Z-axis rotation exp(-i*angle*Z/2) on `qubit`, in place."""
    _check_qubit(state, qubit)
    _check_angles(angle)
    _apply_matrix2(state.amps, state.n_qubits, qubit, rz_matrix(angle))
    return state


def apply_rot(state: StateVector, qubit: int, angles) -> StateVector:
    """General rotation RZ(omega) RY(theta) RZ(phi) on `qubit`, in place."""
    phi, theta, omega = angles
    _check_qubit(state, qubit)
    _check_angles(phi, theta, omega)
    _apply_matrix2(state.amps, state.n_qubits, qubit, rot_matrix(phi, theta, omega))
    return state


def apply_cnot(state: StateVector, control: int, target: int) -> StateVector:
    """Controlled-NOT with the given control/target qubits, in place."""
    if control == target:
        raise ValueError("control and target qubits must differ")
    _check_qubit(state, control)
    _check_qubit(state, target)
    _apply_cnot(state.amps, state.n_qubits, control, target)
    return state


def apply_ops(state: StateVector, ops) -> StateVector:
    """Apply a list of ops in sequence, in place."""
    for op in ops:
        _validate_op(op, state.n_qubits)
        _apply_op(state.amps, state.n_qubits, op)
    return state


def expectation_z(state: StateVector, qubit: int) -> float:
    """Pauli-Z expectation on `qubit`: sum of (+-1) * |amp|^2 over basis states."""
    _check_qubit(state, qubit)
    return float(_expectation_z(state.amps, state.n_qubits, qubit))


def fidelity(a: StateVector, b: StateVector) -> float:
    """|<a|b>|^2; equals 1 iff the states match up to global phase."""
    if a.n_qubits != b.n_qubits:
        raise ValueError("states have different qubit counts")
    return float(abs(np.vdot(a.amps, b.amps)) ** 2)


# --- full-unitary test oracle -----------------------------------------------

def _validate_op(op, n_qubits: int) -> None:
    name, qubits, params = op
    if name == "cnot":
        control, target = qubits
        if control == target:
            raise ValueError("control and target qubits must differ")
        ok = 0 <= control < n_qubits and 0 <= target < n_qubits
    elif name in _MATRIX_FNS:
        (q,) = qubits
        ok = 0 <= q < n_qubits
        _check_angles(*params)
    else:
        raise ValueError(f"unknown gate {name!r}")
    if not ok:
        raise ValueError(f"qubit index out of range in op {op!r}")


def _embed_1q(mat: np.ndarray, n_qubits: int, qubit: int) -> np.ndarray:
    u = np.eye(1, dtype=np.complex128)
    for q in range(n_qubits):
        u = np.kron(u, mat if q == qubit else np.eye(2))
    return u


def _cnot_unitary(n_qubits: int, control: int, target: int) -> np.ndarray:
    dim = 2**n_qubits
    cbit = n_qubits - 1 - control
    tbit = n_qubits - 1 - target
    u = np.zeros((dim, dim), dtype=np.complex128)
    for b in range(dim):
        b_out = b ^ (1 << tbit) if (b >> cbit) & 1 else b
        u[b_out, b] = 1.0
    return u


def full_unitary_oracle(ops, n_qubits: int) -> np.ndarray:
    """Whole-circuit unitary built by explicit tensor products and matmul.

    Deliberately naive; intended as an independent check of the in-place
    kernels, hence the small size cap.
    """
    if n_qubits > ORACLE_MAX_QUBITS:
        raise UnsupportedSizeError(
            f"full-unitary oracle supports at most {ORACLE_MAX_QUBITS} qubits"
        )
    if n_qubits < 1:
        raise ValueError("n_qubits must be at least 1")
    total = np.eye(2**n_qubits, dtype=np.complex128)
    for op in ops:
        _validate_op(op, n_qubits)
        name, qubits, params = op
        if name == "cnot":
            u = _cnot_unitary(n_qubits, qubits[0], qubits[1])
        else:
            u = _embed_1q(_MATRIX_FNS[name](*params), n_qubits, qubits[0])
        total = u @ total
    return total
