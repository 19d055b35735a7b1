"""Episodic circuit-construction environment.

Each episode starts from the empty circuit on |0...0>.  A step appends the
chosen gate (rotations enter at angle 0), runs the configured angle
optimization when the appended gate is a rotation, and re-evaluates the
energy.  The reward is +5 on reaching the accuracy threshold, -5 on running
past the slot budget, and otherwise the relative improvement
(E_prev - E_t) / (E_prev - E_ref) capped below at -1.

The success test is on the error E_t - E_ref, where E_ref is the exact
ground energy or any lower bound for it; the threshold xi is supplied per
episode (frozen within one) and normally comes from the curriculum
controller.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .circuit import (
    ActionSpec,
    CircuitState,
    depth,
    encode_state,
    enumerate_actions,
    gate_count,
)
from .hamiltonian import PauliHamiltonian
from .optimizers import apply_strategy
from .simulator import circuit_energy, expectation, zero_state

SUCCESS_REWARD = 5.0
OVERLENGTH_REWARD = -5.0
REWARD_FLOOR = -1.0

# Below this gap E_prev is numerically at the reference; see compute_reward.
DENOMINATOR_GUARD = 1e-12


@dataclass(frozen=True)
class EnvConfig:
    hamiltonian: PauliHamiltonian
    max_slots: int
    reference_energy: float
    threshold: float
    optimizer: str = "rotosolve"
    strategy: str = "local"
    iterations: int | None = None

    def __post_init__(self) -> None:
        if self.max_slots < 1:
            raise ValueError("max_slots must be >= 1")
        if not self.threshold > 0:
            raise ValueError("threshold must be positive")


@dataclass(frozen=True)
class StepOutcome:
    next_state: CircuitState
    reward: float
    done: bool
    info: dict


def compute_reward(
    e_prev: float,
    e_t: float,
    e_ref: float,
    threshold: float,
    t: int,
    max_slots: int,
) -> float:
    """Per-step reward.

    +5 when the error E_t - E_ref drops below the threshold; -5 when the
    step count exceeds the slot budget; otherwise the relative improvement
    capped below at -1.  When E_prev sits at the reference (denominator
    below the guard) the intermediate reward is 1 for an improvement and 0
    otherwise.
    """
    if (e_t - e_ref) < threshold:
        return SUCCESS_REWARD
    if t > max_slots:
        return OVERLENGTH_REWARD
    denominator = e_prev - e_ref
    if abs(denominator) < DENOMINATOR_GUARD:
        return 0.0 if e_t >= e_prev else 1.0
    return max((e_prev - e_t) / denominator, REWARD_FLOOR)


def _action_set(num_qubits: int) -> list[ActionSpec]:
    """Action list for a register; a single qubit gets its 3 rotations
    (the |Q|(|Q|+2) formula with no CNOT pairs)."""
    if num_qubits >= 2:
        return enumerate_actions(num_qubits)
    return [
        ActionSpec(i, kind, target=0) for i, kind in enumerate(("RX", "RY", "RZ"))
    ]


class VqeEnvironment:
    """Mutable episode state over an immutable configuration.

    One instance is single-threaded; run independent instances for parallel
    trials.
    """

    def __init__(self, config: EnvConfig):
        self.config = config
        self.num_qubits = config.hamiltonian.num_qubits
        self.actions = _action_set(self.num_qubits)
        self.initial_energy = expectation(
            zero_state(self.num_qubits), config.hamiltonian
        )
        self._threshold = config.threshold
        self._state: CircuitState | None = None
        self._t = 0
        self._done = True

    @property
    def threshold(self) -> float:
        return self._threshold

    @property
    def state(self) -> CircuitState:
        if self._state is None:
            raise RuntimeError("environment not reset")
        return self._state

    @property
    def done(self) -> bool:
        return self._done

    def reset(self, threshold: float | None = None) -> CircuitState:
        """Start a new episode; optionally install the episode's threshold."""
        if threshold is not None:
            if not threshold > 0:
                raise ValueError("threshold must be positive")
            self._threshold = threshold
        self._state = CircuitState.empty(self.config.max_slots, self.initial_energy)
        self._t = 0
        self._done = False
        return self._state

    def step(self, action: ActionSpec | int) -> StepOutcome:
        """Append the chosen gate, optimize if it was a rotation, reward."""
        if self._done or self._state is None:
            raise RuntimeError("step() called on a terminated episode")
        spec = self.actions[action] if isinstance(action, int) else action
        cfg = self.config
        e_prev = self._state.energy
        self._t += 1
        t = self._t

        if t > cfg.max_slots:
            # The slot budget is exhausted: the attempted gate is not
            # appended (the encoding has no room for it) and the episode
            # ends with the minimum reward.
            e_t = e_prev
            next_state = self._state
        else:
            gate = spec.to_gate(angle=0.0)
            appended = self._state.with_gate(gate, e_prev)
            if gate.is_rotation:
                optimized = apply_strategy(
                    cfg.strategy,
                    appended,
                    cfg.hamiltonian,
                    optimizer=cfg.optimizer,
                    iterations=cfg.iterations,
                )
                next_state = optimized.circuit
            else:
                # A CNOT changes the state but triggers no optimizer call.
                e_after = circuit_energy(appended.slots, cfg.hamiltonian)
                next_state = CircuitState(appended.slots, appended.max_slots, e_after)
            e_t = next_state.energy

        reward = compute_reward(
            e_prev, e_t, cfg.reference_energy, self._threshold, t, cfg.max_slots
        )
        success = reward == SUCCESS_REWARD
        done = success or t > cfg.max_slots
        self._state = next_state
        self._done = done
        return StepOutcome(
            next_state=next_state,
            reward=reward,
            done=done,
            info={"E_t": e_t, "E_prev": e_prev, "t": t, "success": success},
        )


@dataclass
class EpisodeRecord:
    """Full trace of one episode.

    min_energy is the minimum post-step energy, the quantity the curriculum
    controller consumes (as min_energy - E_ref).
    """

    states: list = field(default_factory=list)  # encoded state vectors
    actions: list[int] = field(default_factory=list)
    rewards: list[float] = field(default_factory=list)
    final_energy: float = 0.0
    min_energy: float = float("inf")
    depth: int = 0
    gate_count: int = 0
    success: bool = False
    final_circuit: CircuitState | None = None

    def to_json(self) -> str:
        return json.dumps(
            {
                "states": [list(map(float, s)) for s in self.states],
                "actions": self.actions,
                "rewards": self.rewards,
                "final_energy": self.final_energy,
                "min_energy": self.min_energy,
                "depth": self.depth,
                "gate_count": self.gate_count,
                "success": self.success,
            }
        )


def run_episode(
    env: VqeEnvironment,
    policy,
    threshold: float | None = None,
    energy_offset: float = 0.0,
) -> EpisodeRecord:
    """Roll one episode under a policy mapping encoded states to actions."""
    state = env.reset(threshold=threshold)
    record = EpisodeRecord()
    encoding = encode_state(state, env.num_qubits, energy_offset)
    while not env.done:
        action = int(policy(encoding))
        outcome = env.step(action)
        record.states.append(encoding)
        record.actions.append(action)
        record.rewards.append(outcome.reward)
        record.min_energy = min(record.min_energy, outcome.info["E_t"])
        encoding = encode_state(outcome.next_state, env.num_qubits, energy_offset)
        state = outcome.next_state
    record.final_energy = state.energy
    record.depth = depth(state)
    record.gate_count = gate_count(state)
    record.success = bool(record.rewards and record.rewards[-1] == SUCCESS_REWARD)
    record.final_circuit = state
    return record
