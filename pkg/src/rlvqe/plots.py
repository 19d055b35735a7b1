"""Figure rendering from episode logs.

Two figures per trial: the final-error trace with the moving threshold
overlaid (log-scale errors, chemical accuracy marked), and the threshold /
amortization traces.  Files are written next to the CSV exports.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .curriculum import CHEMICAL_ACCURACY

_POSITIVE_FLOOR = 1e-12  # log-scale plots clip errors below this


def _split_phases(records: list[dict]) -> tuple[list[dict], list[dict]]:
    train = [r for r in records if r.get("phase") == "train"]
    test = [r for r in records if r.get("phase") == "test"]
    return train, test


def render_error_trace(records: list[dict], path: Path) -> Path:
    """Final error per episode (train and test) with the threshold curve."""
    train, test = _split_phases(records)
    fig, ax = plt.subplots(figsize=(8, 5))
    for rows, label, marker in ((train, "training", "o"), (test, "greedy test", "x")):
        if rows:
            ax.scatter(
                [r["episode"] for r in rows],
                [max(r["final_error"], _POSITIVE_FLOOR) for r in rows],
                s=12,
                marker=marker,
                alpha=0.6,
                label=label,
            )
    if train:
        ax.plot(
            [r["episode"] for r in train],
            [max(r["xi"], _POSITIVE_FLOOR) for r in train],
            color="tab:orange",
            lw=1.5,
            label="threshold",
        )
    ax.axhline(CHEMICAL_ACCURACY, color="tab:red", lw=1.0, ls="--",
               label="chemical accuracy")
    ax.set_yscale("log")
    ax.set_xlabel("episode")
    ax.set_ylabel("energy error [Ha]")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_threshold_trace(records: list[dict], path: Path) -> Path:
    """Threshold and amortization value per episode."""
    train, _ = _split_phases(records)
    fig, ax = plt.subplots(figsize=(8, 4))
    episodes = [r["episode"] for r in train]
    ax.plot(episodes, [r["xi"] for r in train], color="tab:orange", label="threshold")
    deltas = [r["delta"] for r in train]
    if any(d is not None for d in deltas):
        ax.plot(
            episodes,
            [0.0 if d is None else d for d in deltas],
            color="tab:blue",
            label="amortization",
        )
    ax.set_xlabel("episode")
    ax.set_ylabel("Hartree")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_trial_figures(
    records: list[dict], out_dir: Path, stem: str
) -> list[Path]:
    out_dir = Path(out_dir)
    return [
        render_error_trace(records, out_dir / f"{stem}_error.png"),
        render_threshold_trace(records, out_dir / f"{stem}_threshold.png"),
    ]
