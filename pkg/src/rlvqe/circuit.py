"""RL-facing circuit representation and the discrete action space.

A circuit is an ordered, bounded list of gate slots plus the energy of the
state it prepares.  The numeric encoding packs each slot into a 4-integer
block (control, target, rotated-qubit, axis); unused qubit fields hold the
sentinel value num_qubits and unused axis fields hold 0.  Axes are numbered
X=1, Y=2, Z=3.  The encoded vector ends with one energy entry, so its length
is 4 * max_slots + 1.

The action set on |Q| qubits has |Q|(|Q|+2) entries: 3|Q| rotations ordered
by (qubit, axis) with axis order X, Y, Z, followed by the 2*C(|Q|,2) ordered
CNOT pairs in lexicographic (control, target) order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .simulator import GateSpec

AXIS_CODES = {"RX": 1, "RY": 2, "RZ": 3}
AXIS_KINDS = {code: kind for kind, code in AXIS_CODES.items()}


@dataclass(frozen=True)
class CircuitState:
    """Gate slots, slot capacity, and the energy of the prepared state."""

    slots: tuple[GateSpec, ...]
    max_slots: int
    energy: float

    def __post_init__(self) -> None:
        if self.max_slots < 1:
            raise ValueError("max_slots must be positive")
        if len(self.slots) > self.max_slots:
            raise ValueError(
                f"{len(self.slots)} gates exceed the {self.max_slots}-slot bound"
            )

    @classmethod
    def empty(cls, max_slots: int, energy: float) -> "CircuitState":
        return cls(slots=(), max_slots=max_slots, energy=energy)

    def with_gate(self, gate: GateSpec, energy: float) -> "CircuitState":
        return CircuitState(self.slots + (gate,), self.max_slots, energy)

    def with_angles(self, angles: dict[int, float], energy: float) -> "CircuitState":
        """Replace rotation angles at the given slot positions."""
        slots = list(self.slots)
        for pos, angle in angles.items():
            if not slots[pos].is_rotation:
                raise ValueError(f"slot {pos} holds a CNOT, not a rotation")
            slots[pos] = slots[pos].with_angle(angle)
        return CircuitState(tuple(slots), self.max_slots, energy)

    def rotation_positions(self) -> tuple[int, ...]:
        return tuple(i for i, g in enumerate(self.slots) if g.is_rotation)


@dataclass(frozen=True)
class ActionSpec:
    """One discrete action: a gate choice without its angle."""

    index: int
    kind: str
    target: int
    control: int | None = None

    def to_gate(self, angle: float = 0.0) -> GateSpec:
        """Materialize the action; new rotations start at angle 0."""
        if self.kind == "CNOT":
            return GateSpec("CNOT", target=self.target, control=self.control)
        return GateSpec(self.kind, target=self.target, angle=angle)


def num_actions(num_qubits: int) -> int:
    """|Q|(|Q|+2) = 3|Q| rotations + 2*C(|Q|,2) ordered CNOT pairs."""
    return num_qubits * (num_qubits + 2)


def enumerate_actions(num_qubits: int) -> list[ActionSpec]:
    """The fixed, documented action ordering for a register size."""
    if num_qubits < 2:
        raise ValueError("action space needs at least 2 qubits")
    actions: list[ActionSpec] = []
    for qubit in range(num_qubits):
        for kind in ("RX", "RY", "RZ"):
            actions.append(ActionSpec(len(actions), kind, target=qubit))
    for control in range(num_qubits):
        for target in range(num_qubits):
            if control != target:
                actions.append(
                    ActionSpec(len(actions), "CNOT", target=target, control=control)
                )
    assert len(actions) == num_actions(num_qubits)
    return actions


def encode_state(
    circuit: CircuitState, num_qubits: int, energy_offset: float = 0.0
) -> np.ndarray:
    """Fixed-length numeric encoding: max_slots 4-field blocks + energy.

    The energy entry is circuit.energy - energy_offset; pass the reference
    energy as the offset to standardize the feature near zero.
    """
    sentinel = num_qubits
    out = np.empty(4 * circuit.max_slots + 1, dtype=np.float64)
    for i in range(circuit.max_slots):
        base = 4 * i
        if i < len(circuit.slots):
            gate = circuit.slots[i]
            if gate.kind == "CNOT":
                block = (gate.control, gate.target, sentinel, 0)
            else:
                block = (sentinel, sentinel, gate.target, AXIS_CODES[gate.kind])
        else:
            block = (sentinel, sentinel, sentinel, 0)
        out[base : base + 4] = block
    out[-1] = circuit.energy - energy_offset
    return out


def depth(circuit: CircuitState) -> int:
    """Longest gate chain along shared qubit wires, ignoring commutation.

    Each gate lands on layer 1 + max(current layer of its qubits); the depth
    is the maximum layer reached on any wire.
    """
    wire_depth: dict[int, int] = {}
    for gate in circuit.slots:
        layer = 1 + max((wire_depth.get(q, 0) for q in gate.qubits()), default=0)
        for q in gate.qubits():
            wire_depth[q] = layer
    return max(wire_depth.values(), default=0)


def gate_count(circuit: CircuitState) -> int:
    return len(circuit.slots)


def circuit_to_json(circuit: CircuitState) -> str:
    """Serialize for logging and replay."""
    gates = []
    for gate in circuit.slots:
        record: dict = {"kind": gate.kind, "target": gate.target}
        if gate.kind == "CNOT":
            record["control"] = gate.control
        else:
            record["angle"] = gate.angle
        gates.append(record)
    return json.dumps(
        {"max_slots": circuit.max_slots, "energy": circuit.energy, "gates": gates}
    )


def circuit_from_json(text: str) -> CircuitState:
    doc = json.loads(text)
    gates = []
    for record in doc["gates"]:
        if record["kind"] == "CNOT":
            gates.append(
                GateSpec("CNOT", target=record["target"], control=record["control"])
            )
        else:
            gates.append(
                GateSpec(record["kind"], target=record["target"], angle=record["angle"])
            )
    return CircuitState(tuple(gates), doc["max_slots"], doc["energy"])
