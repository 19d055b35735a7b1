"""Moving accuracy threshold with success-driven amortization decay.

The controller tracks the lowest energy error the agent has produced.  Every
episodes_per_shift episodes it greedily re-targets the threshold to that
best error plus a restored amortization slack (which can raise the
threshold - the intended adaptation bump when the agent has stalled).
Between shifts the slack shrinks by delta_step after every
successes_per_decay successful episodes, pulling the threshold down toward
the best error.  The threshold never drops below the chemical-accuracy
floor.
"""

from __future__ import annotations

from dataclasses import dataclass

CHEMICAL_ACCURACY = 1.6e-3  # Hartree

_PROFILES = {
    # Paired with an exact reference energy: start near chemical accuracy.
    "exact-reference": dict(
        xi_initial=0.005,
        episodes_per_shift=2000,
        delta_init=1e-4,
        delta_step=1e-5,
        successes_per_decay=50,
    ),
    # Paired with a crude lower bound: start far above it and walk down.
    # delta_step keeps the 10:1 ratio of the exact-reference preset.
    "lower-bound-proxy": dict(
        xi_initial=4.0,
        episodes_per_shift=500,
        delta_init=0.005,
        delta_step=0.0005,
        successes_per_decay=25,
    ),
}


@dataclass(frozen=True)
class CurriculumProfile:
    xi_initial: float
    episodes_per_shift: int
    delta_init: float
    delta_step: float
    successes_per_decay: int

    def __post_init__(self) -> None:
        for name in (
            "xi_initial",
            "episodes_per_shift",
            "delta_init",
            "delta_step",
            "successes_per_decay",
        ):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


def make_profile(name: str) -> CurriculumProfile:
    try:
        return CurriculumProfile(**_PROFILES[name])
    except KeyError:
        raise ValueError(
            f"unknown curriculum profile {name!r}; "
            f"known: {sorted(_PROFILES)}"
        ) from None


@dataclass
class ThresholdController:
    """Mutable threshold state, advanced once per training episode."""

    xi: float
    delta_init: float
    delta_step: float
    episodes_per_shift: int
    successes_per_decay: int
    xi_final: float = CHEMICAL_ACCURACY
    delta: float | None = None  # defaults to delta_init
    best_error_seen: float = float("inf")
    episodes_since_shift: int = 0
    successes_since_shift: int = 0

    def __post_init__(self) -> None:
        if self.delta is None:
            self.delta = self.delta_init
        if self.xi < self.xi_final:
            raise ValueError("initial threshold below the accuracy floor")

    @classmethod
    def from_profile(
        cls, profile: CurriculumProfile, xi_final: float = CHEMICAL_ACCURACY
    ) -> "ThresholdController":
        return cls(
            xi=profile.xi_initial,
            delta_init=profile.delta_init,
            delta_step=profile.delta_step,
            episodes_per_shift=profile.episodes_per_shift,
            successes_per_decay=profile.successes_per_decay,
            xi_final=xi_final,
        )

    def on_episode_end(self, episode_min_error: float, success: bool) -> float:
        """Advance the controller; returns the threshold for the next episode.

        episode_min_error is min over the episode's steps of E_t - E_ref.
        """
        self.episodes_since_shift += 1
        self.best_error_seen = min(self.best_error_seen, episode_min_error)
        if success:
            self.successes_since_shift += 1
            if self.successes_since_shift % self.successes_per_decay == 0:
                self.delta = max(0.0, self.delta - self.delta_step)
        if self.episodes_since_shift >= self.episodes_per_shift:
            # Greedy shift: re-target to the best error with the slack
            # restored.  This may raise the threshold.
            self.xi = max(self.xi_final, self.best_error_seen + self.delta_init)
            self.delta = self.delta_init
            self.episodes_since_shift = 0
            self.successes_since_shift = 0
        else:
            self.xi = max(
                self.xi_final, min(self.xi, self.best_error_seen + self.delta)
            )
        return self.xi
