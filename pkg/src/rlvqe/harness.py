"""Experiment orchestration: multi-seed runs, aggregation, plot-data export.

A run is described by a JSON config (echoed, fully resolved, into the
output directory).  Each trial trains one agent on one seed and writes a
JSON-lines episode log; trial summaries are aggregated into average-of-
minimum and minimum-of-minimum depth and gate count over the successful
trials, reported in the style "k out of n trials".
"""

from __future__ import annotations

import csv
import json
import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from .agent import AgentConfig, DdqnAgent, training_loop
from .circuit import num_actions
from .curriculum import CHEMICAL_ACCURACY, ThresholdController, make_profile
from .environment import EnvConfig, VqeEnvironment
from .hamiltonian import (
    DENSE_DIAGONALIZATION_LIMIT,
    PauliHamiltonian,
    exact_ground_energy,
    load_hamiltonian,
    lower_bound,
)

REFERENCE_MODES = ("exact", "lower-bound", "explicit")

# Column order of the per-trial plot-data CSV.
CSV_COLUMNS = (
    "episode",
    "final_error",
    "xi",
    "delta",
    "final_energy",
    "threshold_energy",
    "test_final_error",
)


@dataclass(frozen=True)
class RunConfig:
    hamiltonian_path: str
    output_dir: str
    reference_mode: str = "exact"
    reference_value: float | None = None
    curriculum_profile: str | None = "exact-reference"
    fixed_threshold: float | None = None
    max_slots: int = 6
    optimizer: str = "rotosolve"
    strategy: str = "local"
    optimizer_iterations: int | None = None
    agent: AgentConfig = field(default_factory=AgentConfig)
    trials: int = 10
    episodes: int = 5000
    seed: int = 0
    seeds: tuple[int, ...] | None = None
    stop_after_first_success: bool = False
    chemical_accuracy: float = CHEMICAL_ACCURACY
    workers: int = 1

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.reference_mode not in REFERENCE_MODES:
            raise ValueError(
                f"reference_mode must be one of {REFERENCE_MODES}, "
                f"got {self.reference_mode!r}"
            )
        if self.reference_mode == "explicit" and self.reference_value is None:
            raise ValueError("explicit reference mode requires reference_value")
        if (self.curriculum_profile is None) == (self.fixed_threshold is None):
            raise ValueError(
                "exactly one of curriculum_profile and fixed_threshold is required"
            )

    def trial_seeds(self) -> tuple[int, ...]:
        if self.seeds is not None:
            return tuple(self.seeds)
        return tuple(self.seed + i for i in range(self.trials))

    @classmethod
    def from_json(cls, path: str | Path) -> "RunConfig":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls.from_dict(doc, base_dir=Path(path).parent)

    @classmethod
    def from_dict(cls, doc: dict, base_dir: Path | None = None) -> "RunConfig":
        doc = dict(doc)
        agent_doc = doc.pop("agent", {})
        if "hidden_sizes" in agent_doc:
            agent_doc["hidden_sizes"] = tuple(agent_doc["hidden_sizes"])
        if "seeds" in doc and doc["seeds"] is not None:
            doc["seeds"] = tuple(doc["seeds"])
        config = cls(agent=AgentConfig(**agent_doc), **doc)
        if base_dir is not None and not Path(config.hamiltonian_path).is_absolute():
            config = replace(
                config, hamiltonian_path=str(base_dir / config.hamiltonian_path)
            )
        if not Path(config.hamiltonian_path).exists():
            raise FileNotFoundError(
                f"Hamiltonian file not found: {config.hamiltonian_path}"
            )
        return config

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["resolved_seeds"] = list(self.trial_seeds())
        return doc


@dataclass(frozen=True)
class TrialSummary:
    seed: int
    success: bool
    min_depth: int | None
    min_gates: int | None
    best_error: float | None
    episodes_to_first_success: int | None
    episodes_run: int

    def to_dict(self) -> dict:
        return asdict(self)


def resolve_reference(config: RunConfig, h: PauliHamiltonian) -> float:
    if config.reference_mode == "exact":
        return exact_ground_energy(h)
    if config.reference_mode == "lower-bound":
        return lower_bound(h)
    return float(config.reference_value)


def resolve_eval_reference(config: RunConfig, h: PauliHamiltonian) -> float | None:
    """Energy that accuracy metrics are scored against: the exact ground
    energy whenever dense diagonalization is feasible."""
    if h.num_qubits <= DENSE_DIAGONALIZATION_LIMIT:
        return exact_ground_energy(h)
    if config.reference_mode == "explicit":
        return float(config.reference_value)
    return None


def run_trial(config: RunConfig, seed: int) -> TrialSummary:
    """Train one agent on one seed; writes the episode log, returns a summary."""
    h = load_hamiltonian(config.hamiltonian_path)
    e_ref = resolve_reference(config, h)
    eval_ref = resolve_eval_reference(config, h)

    if config.curriculum_profile is not None:
        controller = ThresholdController.from_profile(
            make_profile(config.curriculum_profile),
            xi_final=config.chemical_accuracy,
        )
        threshold = controller.xi
    else:
        controller = None
        threshold = config.fixed_threshold

    env = VqeEnvironment(
        EnvConfig(
            hamiltonian=h,
            max_slots=config.max_slots,
            reference_energy=e_ref,
            threshold=threshold,
            optimizer=config.optimizer,
            strategy=config.strategy,
            iterations=config.optimizer_iterations,
        )
    )
    agent = DdqnAgent(
        config.agent,
        input_dim=4 * config.max_slots + 1,
        num_actions=num_actions(h.num_qubits),
        seed=seed,
    )

    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    log_path = out_dir / f"trial_{seed}.jsonl"
    with log_path.open("w", encoding="utf-8") as log:
        result = training_loop(
            env,
            agent,
            episodes=config.episodes,
            controller=controller,
            eval_reference=eval_ref,
            accuracy_window=config.chemical_accuracy,
            stop_on_accuracy=config.stop_after_first_success,
            on_episode=lambda record: log.write(json.dumps(record) + "\n"),
        )
    agent.save(out_dir / f"trial_{seed}_agent.json")

    success = result.first_accurate_episode is not None
    return TrialSummary(
        seed=seed,
        success=success,
        min_depth=result.min_accurate_depth if success else None,
        min_gates=result.min_accurate_gates if success else None,
        best_error=result.best_error if result.best_error != float("inf") else None,
        episodes_to_first_success=result.first_accurate_episode if success else None,
        episodes_run=result.episodes_run,
    )


def aggregate_summaries(summaries: list[TrialSummary]) -> dict:
    """Average-of-min and min-of-min over successful trials only."""
    wins = [s for s in summaries if s.success]
    aggregate: dict = {
        "trials": len(summaries),
        "successes": len(wins),
        "success_ratio": f"{len(wins)} out of {len(summaries)} trials",
        "avg_min_depth": None,
        "min_min_depth": None,
        "avg_min_gates": None,
        "min_min_gates": None,
    }
    if wins:
        depths = [s.min_depth for s in wins]
        gates = [s.min_gates for s in wins]
        aggregate.update(
            avg_min_depth=sum(depths) / len(depths),
            min_min_depth=min(depths),
            avg_min_gates=sum(gates) / len(gates),
            min_min_gates=min(gates),
        )
    return aggregate


@dataclass
class ExperimentResult:
    config: RunConfig
    summaries: list[TrialSummary]
    aggregate: dict


def _trial_worker(args: tuple[RunConfig, int]) -> TrialSummary:
    return run_trial(*args)


def run_experiment(config: RunConfig) -> ExperimentResult:
    """Run all trials, write the echoed config and the summary file."""
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "config.json").write_text(
        json.dumps(config.to_dict(), indent=2), encoding="utf-8"
    )
    seeds = config.trial_seeds()
    if config.workers > 1:
        # Spawned (not forked) workers: the torch runtime does not survive
        # a fork once its thread pools exist.
        context = multiprocessing.get_context("spawn")
        with ProcessPoolExecutor(
            max_workers=config.workers, mp_context=context
        ) as pool:
            summaries = list(pool.map(_trial_worker, [(config, s) for s in seeds]))
    else:
        summaries = [run_trial(config, seed) for seed in seeds]
    aggregate = aggregate_summaries(summaries)
    (out_dir / "summary.json").write_text(
        json.dumps(
            {"trials": [s.to_dict() for s in summaries], "aggregate": aggregate},
            indent=2,
        ),
        encoding="utf-8",
    )
    return ExperimentResult(config=config, summaries=summaries, aggregate=aggregate)


def read_log(path: str | Path) -> list[dict]:
    records = []
    with Path(path).open(encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as err:
                raise ValueError(f"{path}:{lineno}: malformed log line") from err
    return records


def export_plot_data(records: list[dict], csv_path: str | Path) -> Path:
    """One CSV row per episode, taken from the training-phase records.

    Columns (in order): episode, final_error, xi, delta, final_energy,
    threshold_energy, test_final_error.  threshold_energy is the absolute
    energy the threshold corresponds to, final_energy - final_error + xi.
    """
    csv_path = Path(csv_path)
    train = {r["episode"]: r for r in records if r.get("phase") == "train"}
    test = {r["episode"]: r for r in records if r.get("phase") == "test"}
    if not train:
        raise ValueError("log contains no training-phase records")
    with csv_path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(CSV_COLUMNS)
        for episode in sorted(train):
            r = train[episode]
            reference = r["final_energy"] - r["final_error"]
            t = test.get(episode)
            writer.writerow(
                [
                    episode,
                    repr(r["final_error"]),
                    repr(r["xi"]),
                    "" if r["delta"] is None else repr(r["delta"]),
                    repr(r["final_energy"]),
                    repr(reference + r["xi"]),
                    "" if t is None else repr(t["final_error"]),
                ]
            )
    return csv_path


def export_run(run_dir: str | Path, render_figures: bool = True) -> list[Path]:
    """Export CSVs (and figures) for every trial log in a run directory."""
    run_dir = Path(run_dir)
    logs = sorted(run_dir.glob("trial_*.jsonl"))
    if not logs:
        raise FileNotFoundError(f"no trial_*.jsonl logs under {run_dir}")
    plots_dir = run_dir / "plots"
    plots_dir.mkdir(exist_ok=True)
    outputs: list[Path] = []
    for log_path in logs:
        records = read_log(log_path)
        stem = log_path.stem
        outputs.append(export_plot_data(records, plots_dir / f"{stem}.csv"))
        if render_figures:
            from .plots import render_trial_figures

            outputs.extend(render_trial_figures(records, plots_dir, stem))
    return outputs
