"""Command-line interface.

Subcommands:
  train     run a multi-seed experiment from a JSON config
  baseline  search the smallest hardware-efficient layer count that reaches
            chemical accuracy on a Hamiltonian
  inspect   print Hamiltonian statistics (qubits, terms, bounds, energies)
  export    write per-trial CSV plot data and figures from a run directory
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .baselines import HardwareEfficientSpec, build_hardware_efficient, reference_table
from .circuit import depth, gate_count
from .curriculum import CHEMICAL_ACCURACY
from .hamiltonian import (
    DENSE_DIAGONALIZATION_LIMIT,
    HamiltonianParseError,
    exact_ground_energy,
    load_hamiltonian,
    lower_bound,
)
from .harness import RunConfig, export_run, run_experiment
from .optimizers import apply_strategy
from .simulator import expectation, zero_state


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rlvqe",
        description="Train an RL agent to synthesize shallow VQE ansatz circuits.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="run a multi-seed experiment")
    train.add_argument("--config", required=True, help="JSON run configuration")
    train.add_argument("--seed", type=int, help="override the base seed")
    train.add_argument("--trials", type=int, help="override the trial count")
    train.add_argument("--episodes", type=int, help="override the episode budget")
    train.add_argument("--output-dir", help="override the output directory")
    train.add_argument("--workers", type=int, help="parallel trial workers")

    baseline = sub.add_parser(
        "baseline", help="hardware-efficient layer search on a Hamiltonian"
    )
    baseline.add_argument("hamiltonian", help="Hamiltonian file")
    baseline.add_argument("--max-layers", type=int, default=8)
    baseline.add_argument(
        "--optimizer", choices=("rotosolve", "cobyla"), default="rotosolve"
    )
    baseline.add_argument("--iterations", type=int, default=None)
    baseline.add_argument("--axis", choices=("RX", "RY", "RZ"), default="RY")
    baseline.add_argument("--accuracy", type=float, default=CHEMICAL_ACCURACY)

    inspect = sub.add_parser("inspect", help="print Hamiltonian statistics")
    inspect.add_argument("hamiltonian", help="Hamiltonian file")

    export = sub.add_parser("export", help="write CSV plot data and figures")
    export.add_argument("run_dir", help="output directory of a finished run")
    export.add_argument(
        "--no-figures", action="store_true", help="write only the CSV files"
    )
    return parser


def _cmd_inspect(args: argparse.Namespace) -> int:
    try:
        h = load_hamiltonian(args.hamiltonian)
    except (OSError, HamiltonianParseError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    print(f"file: {args.hamiltonian}")
    print(f"qubits: {h.num_qubits}")
    print(f"terms: {len(h.terms)}")
    print(f"lower bound: {lower_bound(h)} Ha")
    print(f"fiducial energy <0|H|0>: {expectation(zero_state(h.num_qubits), h)} Ha")
    if h.num_qubits <= DENSE_DIAGONALIZATION_LIMIT:
        print(f"exact ground energy: {exact_ground_energy(h)} Ha")
    else:
        print(
            "exact ground energy: skipped "
            f"({h.num_qubits} qubits exceeds the {DENSE_DIAGONALIZATION_LIMIT}-qubit dense limit)"
        )
    return 0


def _cmd_baseline(args: argparse.Namespace) -> int:
    try:
        h = load_hamiltonian(args.hamiltonian)
    except (OSError, HamiltonianParseError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    if h.num_qubits > DENSE_DIAGONALIZATION_LIMIT:
        print(
            "error: layer search needs the exact energy; "
            f"{h.num_qubits} qubits exceeds the dense limit",
            file=sys.stderr,
        )
        return 1
    exact = exact_ground_energy(h)
    print(f"exact ground energy: {exact} Ha; target error < {args.accuracy} Ha")
    found = None
    for layers in range(1, args.max_layers + 1):
        spec = HardwareEfficientSpec(
            num_qubits=h.num_qubits, num_layers=layers, axes=(args.axis,)
        )
        circuit = build_hardware_efficient(spec, h)
        result = apply_strategy(
            "global", circuit, h, optimizer=args.optimizer, iterations=args.iterations
        )
        error = result.energy - exact
        d, g = depth(result.circuit), gate_count(result.circuit)
        status = "reached" if error < args.accuracy else "missed"
        print(
            f"layers={layers}: energy={result.energy:.6f} Ha, "
            f"error={error:.2e} Ha, depth={d}, gates={g} ({status})"
        )
        if error < args.accuracy:
            found = (layers, d, g)
            break
    if found is None:
        print(f"no layer count <= {args.max_layers} reached the target accuracy")
    else:
        layers, d, g = found
        print(f"smallest accurate ansatz: {layers} layers, depth {d}, {g} gates")
    print("\nreference circuits (LiH 6-qubit, 2.2 A):")
    for row in reference_table().values():
        print(
            f"  {row.method}: avg depth {row.avg_depth}, min depth {row.min_depth}, "
            f"avg gates {row.avg_gates}, min gates {row.min_gates}"
        )
    return 0


def _cmd_train(args: argparse.Namespace) -> int:
    try:
        config = RunConfig.from_json(args.config)
    except FileNotFoundError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as err:
        print(f"error: invalid config {args.config}: {err}", file=sys.stderr)
        return 1
    overrides = {}
    if args.seed is not None:
        overrides.update(seed=args.seed, seeds=None)
    if args.trials is not None:
        overrides.update(trials=args.trials, seeds=None)
    if args.episodes is not None:
        overrides["episodes"] = args.episodes
    if args.output_dir is not None:
        overrides["output_dir"] = args.output_dir
    if args.workers is not None:
        overrides["workers"] = args.workers
    if overrides:
        config = replace(config, **overrides)
    result = run_experiment(config)
    for summary in result.summaries:
        if summary.success:
            print(
                f"seed {summary.seed}: accurate at episode "
                f"{summary.episodes_to_first_success}, min depth {summary.min_depth}, "
                f"min gates {summary.min_gates}, best error {summary.best_error:.3e} Ha"
            )
        else:
            best = (
                f"{summary.best_error:.3e} Ha"
                if summary.best_error is not None
                else "n/a"
            )
            print(
                f"seed {summary.seed}: no chemically accurate circuit in "
                f"{summary.episodes_run} episodes (best error {best})"
            )
    agg = result.aggregate
    print(f"\nchemical accuracy reached in {agg['success_ratio']}")
    if agg["successes"]:
        print(
            f"depth: avg-of-min {agg['avg_min_depth']:.2f}, "
            f"min-of-min {agg['min_min_depth']}"
        )
        print(
            f"gates: avg-of-min {agg['avg_min_gates']:.2f}, "
            f"min-of-min {agg['min_min_gates']}"
        )
    print(f"logs and summary written to {config.output_dir}")
    return 0


def _cmd_export(args: argparse.Namespace) -> int:
    try:
        outputs = export_run(args.run_dir, render_figures=not args.no_figures)
    except (FileNotFoundError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    for path in outputs:
        print(path)
    return 0


def cli_main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handlers = {
        "train": _cmd_train,
        "baseline": _cmd_baseline,
        "inspect": _cmd_inspect,
        "export": _cmd_export,
    }
    return handlers[args.command](args)


def main() -> None:
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()
