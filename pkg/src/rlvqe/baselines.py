"""Reference ansatz architectures and published benchmark constants.

The hardware-efficient ansatz interleaves one rotation per qubit with a
CNOT ladder CNOT(i, i+1); the layer count is chosen per problem.  The
reference table carries the depth and gate-count benchmarks for the
6-qubit LiH problem at bond distance 2.2 A against which agent circuits
are compared.
"""

from __future__ import annotations

from dataclasses import dataclass

from .circuit import CircuitState
from .hamiltonian import PauliHamiltonian
from .simulator import GateSpec, expectation, zero_state


@dataclass(frozen=True)
class HardwareEfficientSpec:
    """Layer pattern: rotations on every qubit, then a CNOT ladder.

    axes gives the rotation axis per layer (cycled when shorter than
    num_layers); a final rotation layer may be appended after the last
    ladder.
    """

    num_qubits: int
    num_layers: int
    axes: tuple[str, ...] = ("RY",)
    final_rotation_layer: bool = False

    def __post_init__(self) -> None:
        if self.num_qubits < 2:
            raise ValueError("hardware-efficient ansatz needs >= 2 qubits")
        if self.num_layers < 1:
            raise ValueError("num_layers must be >= 1")
        for axis in self.axes:
            if axis not in ("RX", "RY", "RZ"):
                raise ValueError(f"unknown rotation axis {axis!r}")

    def gate_count(self) -> int:
        count = self.num_layers * (2 * self.num_qubits - 1)
        if self.final_rotation_layer:
            count += self.num_qubits
        return count


def build_hardware_efficient(
    spec: HardwareEfficientSpec, hamiltonian: PauliHamiltonian | None = None
) -> CircuitState:
    """Deterministic circuit per the layer pattern, all angles zero.

    At zero angles the circuit prepares |0...0>, so when a Hamiltonian is
    supplied the energy field is its fiducial expectation; otherwise 0.0.
    """
    gates: list[GateSpec] = []
    for layer in range(spec.num_layers):
        axis = spec.axes[layer % len(spec.axes)]
        for qubit in range(spec.num_qubits):
            gates.append(GateSpec(axis, target=qubit, angle=0.0))
        for qubit in range(spec.num_qubits - 1):
            gates.append(GateSpec("CNOT", target=qubit + 1, control=qubit))
    if spec.final_rotation_layer:
        axis = spec.axes[spec.num_layers % len(spec.axes)]
        for qubit in range(spec.num_qubits):
            gates.append(GateSpec(axis, target=qubit, angle=0.0))
    energy = 0.0
    if hamiltonian is not None:
        energy = expectation(zero_state(spec.num_qubits), hamiltonian)
    return CircuitState(tuple(gates), max_slots=len(gates), energy=energy)


@dataclass(frozen=True)
class ReferenceRow:
    method: str
    avg_depth: int
    min_depth: int
    avg_gates: int
    min_gates: int
    system: str = "LiH 6-qubit, 2.2 A"


def reference_table() -> dict[str, ReferenceRow]:
    """Benchmark depth/gate-count rows for the 6-qubit LiH problem.

    Fixed architectures (HE, UCCSD) have avg == min by construction.
    """
    rows = [
        ReferenceRow("RL global COBYLA", avg_depth=14, min_depth=12,
                     avg_gates=36, min_gates=29),
        ReferenceRow("HE", avg_depth=17, min_depth=17, avg_gates=63, min_gates=63),
        ReferenceRow("UCCSD", avg_depth=377, min_depth=377,
                     avg_gates=610, min_gates=610),
    ]
    return {row.method: row for row in rows}
