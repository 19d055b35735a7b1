"""Exact statevector simulation of rotation and CNOT gates.

Amplitudes use little-endian ordering: bit q of the array index is the state
of qubit q.  Rotations follow R_P(theta) = exp(-i * theta * P / 2).  Energies
are noiseless, infinite-shot expectation values computed term by term from
the Pauli action on the statevector; no dense Hamiltonian matrix is formed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .hamiltonian import PauliHamiltonian

MAX_QUBITS = 24

ROTATION_KINDS = ("RX", "RY", "RZ")
GATE_KINDS = ROTATION_KINDS + ("CNOT",)


@dataclass(frozen=True)
class GateSpec:
    """One gate: a single-qubit rotation (kind RX/RY/RZ, target, angle) or a
    CNOT (control, target).  Angles are radians; any finite real is accepted
    and acts 2*pi-periodically."""

    kind: str
    target: int
    control: int | None = None
    angle: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if self.target < 0:
            raise ValueError("target qubit index must be non-negative")
        if self.kind == "CNOT":
            if self.control is None:
                raise ValueError("CNOT requires a control qubit")
            if self.control < 0:
                raise ValueError("control qubit index must be non-negative")
            if self.control == self.target:
                raise ValueError("CNOT control and target must differ")
            if self.angle is not None:
                raise ValueError("CNOT takes no angle")
        else:
            if self.control is not None:
                raise ValueError(f"{self.kind} takes no control qubit")
            if self.angle is None or not math.isfinite(self.angle):
                raise ValueError(f"{self.kind} requires a finite angle")

    @property
    def is_rotation(self) -> bool:
        return self.kind != "CNOT"

    def with_angle(self, angle: float) -> "GateSpec":
        return GateSpec(self.kind, self.target, angle=angle)

    def qubits(self) -> tuple[int, ...]:
        if self.kind == "CNOT":
            return (self.control, self.target)
        return (self.target,)


@dataclass(frozen=True)
class StateVector:
    """2^n complex amplitudes, little-endian, normalized."""

    amplitudes: np.ndarray = field(repr=False)
    num_qubits: int

    def __post_init__(self) -> None:
        if self.amplitudes.shape != (2**self.num_qubits,):
            raise ValueError(
                f"expected {2**self.num_qubits} amplitudes, "
                f"got shape {self.amplitudes.shape}"
            )
        norm_sq = float(np.sum(np.abs(self.amplitudes) ** 2))
        # Loose guard against gross construction bugs; tight norm bounds are
        # asserted by the test suite.
        if abs(norm_sq - 1.0) > 1e-8:
            raise ValueError(f"statevector not normalized: |psi|^2 = {norm_sq}")


def zero_state(num_qubits: int) -> StateVector:
    """The fiducial all-zero state |0...0>."""
    if not 1 <= num_qubits <= MAX_QUBITS:
        raise ValueError(
            f"num_qubits must be in [1, {MAX_QUBITS}], got {num_qubits}"
        )
    amps = np.zeros(2**num_qubits, dtype=complex)
    amps[0] = 1.0
    return StateVector(amplitudes=amps, num_qubits=num_qubits)


def _rotation_matrix(kind: str, angle: float) -> np.ndarray:
    c = math.cos(angle / 2.0)
    s = math.sin(angle / 2.0)
    if kind == "RX":
        return np.array([[c, -1j * s], [-1j * s, c]])
    if kind == "RY":
        return np.array([[c, -s], [s, c]])
    # RZ
    return np.array([[c - 1j * s, 0.0], [0.0, c + 1j * s]])


def apply_gate(state: StateVector, gate: GateSpec) -> StateVector:
    """Apply one gate, returning a new statevector."""
    n = state.num_qubits
    for q in gate.qubits():
        if q >= n:
            raise ValueError(f"qubit index {q} out of range for {n} qubits")
    if gate.kind == "CNOT":
        # View as an n-axis tensor; axis n-1-q corresponds to qubit q.
        out = state.amplitudes.copy().reshape((2,) * n)
        sel: list[slice] = [slice(None)] * n
        sel[n - 1 - gate.control] = slice(1, 2)
        sel_t = tuple(sel)
        # Flipping the length-2 target axis swaps |0> and |1> on the
        # control = 1 slice, which is exactly the CNOT action.
        out[sel_t] = np.flip(out[sel_t], axis=n - 1 - gate.target)
        return StateVector(out.reshape(-1), n)
    u = _rotation_matrix(gate.kind, gate.angle)
    # Group the index as (high bits, target bit, low bits).
    low = 2**gate.target
    view = state.amplitudes.reshape(-1, 2, low)
    x0 = view[:, 0, :]
    x1 = view[:, 1, :]
    out = np.empty_like(view)
    out[:, 0, :] = u[0, 0] * x0 + u[0, 1] * x1
    out[:, 1, :] = u[1, 0] * x0 + u[1, 1] * x1
    return StateVector(out.reshape(-1), n)


def apply_circuit(gates, num_qubits: int) -> StateVector:
    """Run a gate sequence on |0...0>."""
    state = zero_state(num_qubits)
    for gate in gates:
        state = apply_gate(state, gate)
    return state


def _bit_parity(x: np.ndarray) -> np.ndarray:
    """Parity of the set bits of each entry (entries < 2^63)."""
    x = x.copy()
    for shift in (32, 16, 8, 4, 2, 1):
        x ^= x >> shift
    return x & 1


def _pauli_masks(ops: str) -> tuple[int, int, int]:
    """Bit masks (flip, y, z) for a Pauli string; flip covers X and Y."""
    flip = y = z = 0
    for q, op in enumerate(ops):
        if op == "X":
            flip |= 1 << q
        elif op == "Y":
            flip |= 1 << q
            y |= 1 << q
        elif op == "Z":
            z |= 1 << q
    return flip, y, z


def pauli_expectation(state: StateVector, ops: str) -> complex:
    """<psi| P |psi> for one Pauli string via index arithmetic.

    P maps |b> to phase(b) |b XOR flip> with
    phase(b) = i^{#Y} * (-1)^{popcount(b & (y_mask | z_mask))}.
    """
    flip, y_mask, z_mask = _pauli_masks(ops)
    psi = state.amplitudes
    idx = np.arange(psi.size, dtype=np.int64)
    signs = 1.0 - 2.0 * _bit_parity(idx & (y_mask | z_mask))
    prefactor = 1j ** bin(y_mask).count("1")
    if flip:
        bra = np.conj(psi[idx ^ flip])
    else:
        bra = np.conj(psi)
    return prefactor * np.sum(bra * signs * psi)


def expectation(state: StateVector, h: PauliHamiltonian) -> float:
    """<psi| H |psi> = sum_j c_j <psi| P_j |psi>, returned as a real number."""
    if state.num_qubits != h.num_qubits:
        raise ValueError(
            f"state has {state.num_qubits} qubits but Hamiltonian "
            f"has {h.num_qubits}"
        )
    value = complex(0.0)
    for coeff, string in h.terms:
        value += coeff * pauli_expectation(state, string.ops)
    if abs(value.imag) >= 1e-9:
        raise AssertionError(
            f"expectation has non-negligible imaginary part {value.imag}"
        )
    return float(value.real)


def circuit_energy(gates, h: PauliHamiltonian) -> float:
    """Energy of the circuit applied to |0...0>."""
    return expectation(apply_circuit(gates, h.num_qubits), h)
