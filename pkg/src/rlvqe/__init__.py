"""Reinforcement-learning synthesis of shallow VQE ansatz circuits.

The package trains an n-step double deep-Q agent to build variational
circuits gate by gate, scoring each circuit by its exact statevector energy
and guiding training with a moving accuracy threshold that needs only a
lower bound on the true ground energy.
"""

from importlib import resources
from pathlib import Path

from .agent import (
    AgentConfig,
    DdqnAgent,
    QNetwork,
    ReplayBuffer,
    Transition,
    select_action,
    train_step,
    training_loop,
)
from .baselines import (
    HardwareEfficientSpec,
    ReferenceRow,
    build_hardware_efficient,
    reference_table,
)
from .circuit import (
    ActionSpec,
    CircuitState,
    circuit_from_json,
    circuit_to_json,
    depth,
    encode_state,
    enumerate_actions,
    gate_count,
    num_actions,
)
from .curriculum import (
    CHEMICAL_ACCURACY,
    CurriculumProfile,
    ThresholdController,
    make_profile,
)
from .environment import (
    EnvConfig,
    EpisodeRecord,
    StepOutcome,
    VqeEnvironment,
    compute_reward,
    run_episode,
)
from .hamiltonian import (
    HamiltonianParseError,
    PauliHamiltonian,
    PauliString,
    exact_ground_energy,
    load_hamiltonian,
    lower_bound,
    parse_hamiltonian,
    serialize_hamiltonian,
)
from .harness import (
    RunConfig,
    TrialSummary,
    export_plot_data,
    export_run,
    run_experiment,
    run_trial,
)
from .optimizers import (
    OptimizeRequest,
    OptimizeResult,
    apply_strategy,
    derivative_free_minimize,
    rotosolve,
)
from .simulator import (
    GateSpec,
    StateVector,
    apply_circuit,
    apply_gate,
    circuit_energy,
    expectation,
    zero_state,
)

__version__ = "0.1.0"


def bundled_hamiltonian_path(name: str) -> Path:
    """Path to a Hamiltonian shipped with the package (e.g. 'toy2q')."""
    ref = resources.files("rlvqe") / "data" / f"{name}.ham"
    if not ref.is_file():
        raise FileNotFoundError(f"no bundled Hamiltonian named {name!r}")
    return Path(str(ref))


def bundled_hamiltonian(name: str) -> PauliHamiltonian:
    return load_hamiltonian(bundled_hamiltonian_path(name))
