"""Continuous optimization of rotation angles for a fixed circuit structure.

Two optimizers are provided: rotosolve, a coordinate-descent scheme that
exploits the exact sinusoidal dependence of the energy on each single
rotation angle, and a COBYLA-based derivative-free minimizer.  Both operate
on a selected subset of rotation slots and leave the circuit structure
untouched.  The "local" strategy optimizes the last five rotation gates, the
"global" strategy all of them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .circuit import CircuitState
from .hamiltonian import PauliHamiltonian
from .simulator import circuit_energy

TWO_PI = 2.0 * math.pi

# One rotosolve iteration is a full cycle over the selected angles.
DEFAULT_ITERATIONS = {
    ("rotosolve", "local"): 5,
    ("rotosolve", "global"): 25,
    ("cobyla", "local"): 100,
    ("cobyla", "global"): 100,
}

LOCAL_WINDOW = 5  # rotations touched by the local strategy

# Below this fitted amplitude the energy is flat in the angle; keep it.
FLAT_AMPLITUDE = 1e-12


@dataclass(frozen=True)
class OptimizeRequest:
    circuit: CircuitState
    hamiltonian: PauliHamiltonian
    indices: tuple[int, ...]
    max_iterations: int

    def __post_init__(self) -> None:
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        for pos in self.indices:
            if not 0 <= pos < len(self.circuit.slots):
                raise ValueError(f"slot index {pos} out of range")
            if not self.circuit.slots[pos].is_rotation:
                raise ValueError(f"slot {pos} holds a CNOT, not a rotation")


@dataclass(frozen=True)
class OptimizeResult:
    angles: dict[int, float]
    energy: float
    evaluations: int
    circuit: CircuitState


def wrap_angle(angle: float) -> float:
    """Map into [0, 2*pi); guards the rounding case angle % 2pi == 2pi."""
    wrapped = angle % TWO_PI
    return 0.0 if wrapped >= TWO_PI else wrapped


class _EnergyObjective:
    """Energy as a function of the selected angles, with call counting."""

    def __init__(self, request: OptimizeRequest):
        self.request = request
        self.gates = list(request.circuit.slots)
        self.evaluations = 0

    def set_angle(self, pos: int, angle: float) -> None:
        self.gates[pos] = self.gates[pos].with_angle(angle)

    def energy(self) -> float:
        self.evaluations += 1
        return circuit_energy(self.gates, self.request.hamiltonian)

    def energy_at(self, vector: np.ndarray) -> float:
        for pos, angle in zip(self.request.indices, vector):
            self.set_angle(pos, float(angle))
        return self.energy()

    def result(self) -> OptimizeResult:
        angles = {
            pos: wrap_angle(self.gates[pos].angle) for pos in self.request.indices
        }
        for pos, angle in angles.items():
            self.set_angle(pos, angle)
        energy = self.energy()
        circuit = self.request.circuit.with_angles(angles, energy)
        return OptimizeResult(
            angles=angles,
            energy=energy,
            evaluations=self.evaluations,
            circuit=circuit,
        )


def rotosolve(request: OptimizeRequest) -> OptimizeResult:
    """Cyclic closed-form per-angle minimization.

    For each selected angle the energy is an exact sinusoid
    a*sin(theta + b) + c; three evaluations at theta, theta + pi/2 and
    theta - pi/2 determine it, and the angle jumps to the sinusoid's global
    minimizer.  One iteration is a complete cycle over the selected indices.
    """
    if not request.indices:
        raise ValueError("no angles selected")
    obj = _EnergyObjective(request)
    for _ in range(request.max_iterations):
        for pos in sorted(request.indices):
            theta = obj.gates[pos].angle
            m1 = obj.energy()
            obj.set_angle(pos, theta + math.pi / 2)
            m2 = obj.energy()
            obj.set_angle(pos, theta - math.pi / 2)
            m3 = obj.energy()
            amplitude = 0.5 * math.hypot(2 * m1 - m2 - m3, m2 - m3)
            if amplitude < FLAT_AMPLITUDE:
                obj.set_angle(pos, theta)
                continue
            minimizer = theta - math.pi / 2 - math.atan2(2 * m1 - m2 - m3, m2 - m3)
            obj.set_angle(pos, minimizer)
    return obj.result()


def derivative_free_minimize(
    request: OptimizeRequest, rhobeg: float = 1.0, tol: float | None = None
) -> OptimizeResult:
    """COBYLA over the selected angles, capped at max_iterations evaluations.

    Angles are unbounded during the search (the energy is periodic) and
    wrapped into [0, 2*pi) afterwards.  If the search ends above the starting
    energy the original angles are kept, so the result never regresses.
    """
    if not request.indices:
        raise ValueError("no angles selected")
    obj = _EnergyObjective(request)
    x0 = np.array(
        [request.circuit.slots[pos].angle for pos in request.indices], dtype=float
    )
    initial_energy = obj.energy_at(x0)
    res = minimize(
        obj.energy_at,
        x0,
        method="COBYLA",
        options={"maxiter": request.max_iterations, "rhobeg": rhobeg},
        tol=tol,
    )
    final_energy = obj.energy_at(np.asarray(res.x, dtype=float))
    if final_energy > initial_energy:
        obj.energy_at(x0)
    return obj.result()


def select_indices(circuit: CircuitState, strategy: str) -> tuple[int, ...]:
    """Rotation slots a strategy optimizes: the last five, or all of them."""
    rotations = circuit.rotation_positions()
    if strategy == "local":
        return rotations[-LOCAL_WINDOW:]
    if strategy == "global":
        return rotations
    raise ValueError(f"unknown strategy {strategy!r}")


def apply_strategy(
    strategy: str,
    circuit: CircuitState,
    hamiltonian: PauliHamiltonian,
    optimizer: str = "rotosolve",
    iterations: int | None = None,
) -> OptimizeResult:
    """Run one optimization pass as configured.

    With no rotation gates present this is a no-op returning the current
    energy.  Iteration budgets default per (optimizer, strategy); pass
    iterations to override (e.g. COBYLA with a 200-evaluation budget).
    """
    if optimizer not in ("rotosolve", "cobyla"):
        raise ValueError(f"unknown optimizer {optimizer!r}")
    indices = select_indices(circuit, strategy)
    if not indices:
        return OptimizeResult(
            angles={}, energy=circuit.energy, evaluations=0, circuit=circuit
        )
    if iterations is None:
        iterations = DEFAULT_ITERATIONS[(optimizer, strategy)]
    request = OptimizeRequest(
        circuit=circuit,
        hamiltonian=hamiltonian,
        indices=indices,
        max_iterations=iterations,
    )
    if optimizer == "rotosolve":
        return rotosolve(request)
    return derivative_free_minimize(request)
