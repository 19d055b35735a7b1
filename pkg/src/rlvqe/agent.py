"""n-step double deep-Q learning.

The online network picks actions (epsilon-greedy); a periodically synced
target network evaluates them.  Transitions carry an n-step discounted
return and the state observed n steps later; the regression target is
G + gamma^n * Q_target(s', argmax_a Q_online(s', a)) for non-terminal
transitions and G alone for terminal ones.  Training alternates a learning
episode with a greedy test episode whose experience is discarded.

All tensors are float64 and every random draw comes from per-agent
generators, so runs are bit-reproducible for a fixed seed on one platform.
"""

from __future__ import annotations

import hashlib
import json
import math
from collections import deque
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np
import torch

from .circuit import depth, encode_state, gate_count
from .environment import SUCCESS_REWARD, VqeEnvironment


@dataclass(frozen=True)
class AgentConfig:
    discount: float = 0.88
    epsilon_initial: float = 1.0
    epsilon_decay: float = 0.99995
    epsilon_min: float = 0.05
    replay_capacity: int = 20_000
    target_sync_period: int = 500  # training actions between target syncs
    n_step: int = 6
    batch_size: int = 64
    learning_rate: float = 1e-3
    hidden_sizes: tuple[int, ...] = (128, 128)
    warmup_transitions: int = 1_000
    standardize_energy: bool = True  # feed E - E_ref instead of raw E

    def __post_init__(self) -> None:
        if not 0 < self.discount <= 1:
            raise ValueError("discount must be in (0, 1]")
        if not 0 <= self.epsilon_min <= self.epsilon_initial <= 1:
            raise ValueError("need 0 <= epsilon_min <= epsilon_initial <= 1")
        if self.n_step < 1:
            raise ValueError("n_step must be >= 1")


@dataclass(frozen=True)
class Transition:
    state: np.ndarray
    action: int
    return_: float  # sum_{k<m} gamma^k r_{t+k}, m <= n, truncated at terminal
    bootstrap_state: np.ndarray | None  # state n steps later; None if terminal
    done: bool


class ReplayBuffer:
    """Bounded FIFO store with uniform sampling.

    A ring buffer: once full, each push overwrites the oldest entry.
    """

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self._store: list[Transition] = []
        self._cursor = 0

    def __len__(self) -> int:
        return len(self._store)

    def push(self, transition: Transition) -> None:
        if len(self._store) < self.capacity:
            self._store.append(transition)
        else:
            self._store[self._cursor] = transition
            self._cursor = (self._cursor + 1) % self.capacity

    def sample(self, batch_size: int, rng: np.random.Generator) -> list[Transition]:
        if batch_size > len(self._store):
            raise ValueError("not enough transitions to sample a batch")
        picks = rng.choice(len(self._store), size=batch_size, replace=False)
        return [self._store[i] for i in picks]

    def __iter__(self):
        """Oldest to newest."""
        yield from self._store[self._cursor :]
        yield from self._store[: self._cursor]


class QNetwork(torch.nn.Module):
    """Plain ReLU MLP from state encodings to per-action values."""

    def __init__(
        self,
        input_dim: int,
        output_dim: int,
        hidden_sizes: tuple[int, ...] = (128, 128),
        seed: int | None = None,
    ):
        super().__init__()
        self.input_dim = input_dim
        self.output_dim = output_dim
        self.hidden_sizes = tuple(hidden_sizes)
        layers: list[torch.nn.Module] = []
        widths = [input_dim, *hidden_sizes]
        for w_in, w_out in zip(widths, widths[1:]):
            layers.append(torch.nn.Linear(w_in, w_out, dtype=torch.float64))
            layers.append(torch.nn.ReLU())
        layers.append(torch.nn.Linear(widths[-1], output_dim, dtype=torch.float64))
        self.layers = torch.nn.Sequential(*layers)
        if seed is not None:
            self._reinit(seed)

    def _reinit(self, seed: int) -> None:
        gen = torch.Generator().manual_seed(seed)
        for module in self.layers:
            if isinstance(module, torch.nn.Linear):
                fan_in = module.weight.shape[1]
                bound = 1.0 / math.sqrt(fan_in)
                with torch.no_grad():
                    module.weight.uniform_(-bound, bound, generator=gen)
                    module.bias.uniform_(-bound, bound, generator=gen)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.layers(x)

    def q_values(self, encoding: np.ndarray) -> np.ndarray:
        with torch.no_grad():
            out = self(torch.from_numpy(np.asarray(encoding, dtype=np.float64)))
        return out.numpy()


def copy_weights(src: QNetwork, dst: QNetwork) -> None:
    dst.load_state_dict(src.state_dict())


def weights_digest(net: QNetwork) -> str:
    """SHA-256 over the raw parameter bytes, in parameter order."""
    digest = hashlib.sha256()
    for _, tensor in sorted(net.state_dict().items()):
        digest.update(tensor.detach().numpy().tobytes())
    return digest.hexdigest()


def select_action(
    net: QNetwork, encoding: np.ndarray, epsilon: float, rng: np.random.Generator
) -> int:
    """Epsilon-greedy: uniform with probability epsilon, else the argmax
    with ties broken toward the lowest index."""
    if not 0 <= epsilon <= 1:
        raise ValueError("epsilon must be in [0, 1]")
    if epsilon > 0 and rng.random() < epsilon:
        return int(rng.integers(net.output_dim))
    return int(np.argmax(net.q_values(encoding)))


def train_step(
    online: QNetwork,
    target: QNetwork,
    batch: list[Transition],
    gamma: float,
    n_step: int,
    optimizer: torch.optim.Optimizer,
) -> float:
    """One squared-error regression step onto the double-Q targets."""
    if not batch:
        raise ValueError("empty batch")
    states = torch.from_numpy(np.stack([tr.state for tr in batch]))
    actions = torch.tensor([tr.action for tr in batch], dtype=torch.long)
    returns = torch.tensor([tr.return_ for tr in batch], dtype=torch.float64)

    targets = returns.clone()
    live = [i for i, tr in enumerate(batch) if not tr.done]
    if live:
        boot = torch.from_numpy(np.stack([batch[i].bootstrap_state for i in live]))
        with torch.no_grad():
            best = online(boot).argmax(dim=1)
            boot_q = target(boot).gather(1, best.unsqueeze(1)).squeeze(1)
        targets[live] += gamma**n_step * boot_q

    predicted = online(states).gather(1, actions.unsqueeze(1)).squeeze(1)
    loss = torch.mean((predicted - targets) ** 2)
    optimizer.zero_grad()
    loss.backward()
    optimizer.step()
    return float(loss.detach())


class _NStepAssembler:
    """Folds per-step rewards into n-step transitions for the buffer."""

    def __init__(self, n_step: int, gamma: float):
        self.n = n_step
        self.gamma = gamma
        self.pending: deque[tuple[np.ndarray, int, float]] = deque()

    def push(
        self,
        state: np.ndarray,
        action: int,
        reward: float,
        next_state: np.ndarray,
        done: bool,
    ) -> list[Transition]:
        """Feed one step; returns whatever transitions matured.

        A window that fills n steps before the episode ends bootstraps from
        the state n steps ahead; at the terminal every open window flushes
        with its return truncated there and no bootstrap.
        """
        self.pending.append((state, action, reward))
        if done:
            remaining = list(self.pending)
            self.pending.clear()
            out = []
            for i, (s, a, _) in enumerate(remaining):
                g = 0.0
                for k, (_, _, r) in enumerate(remaining[i:]):
                    g += self.gamma**k * r
                out.append(Transition(s, a, g, None, done=True))
            return out
        if len(self.pending) < self.n:
            return []
        s0, a0, _ = self.pending[0]
        g = sum(self.gamma**k * r for k, (_, _, r) in enumerate(self.pending))
        self.pending.popleft()
        return [Transition(s0, a0, g, next_state, done=False)]


class DdqnAgent:
    """Online/target networks plus exploration and replay state."""

    def __init__(
        self, config: AgentConfig, input_dim: int, num_actions: int, seed: int = 0
    ):
        self.config = config
        self.input_dim = input_dim
        self.num_actions = num_actions
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        self.online = QNetwork(input_dim, num_actions, config.hidden_sizes, seed=seed)
        self.target = QNetwork(input_dim, num_actions, config.hidden_sizes)
        copy_weights(self.online, self.target)
        self.optimizer = torch.optim.Adam(
            self.online.parameters(), lr=config.learning_rate
        )
        self.buffer = ReplayBuffer(config.replay_capacity)
        self.training_steps = 0  # epsilon-decay counter
        self.action_count = 0  # target-sync counter

    @property
    def epsilon(self) -> float:
        """Closed-form schedule: max(eps_min, decay^steps) from eps_initial."""
        value = self.config.epsilon_initial * (
            self.config.epsilon_decay**self.training_steps
        )
        return max(self.config.epsilon_min, value)

    def act(self, encoding: np.ndarray, greedy: bool = False) -> int:
        eps = 0.0 if greedy else self.epsilon
        return select_action(self.online, encoding, eps, self.rng)

    def observe_training_step(self) -> None:
        """Bookkeeping after each training action: decay and target sync."""
        self.training_steps += 1
        self.action_count += 1
        if self.action_count % self.config.target_sync_period == 0:
            copy_weights(self.online, self.target)

    def maybe_train(self) -> float | None:
        cfg = self.config
        if len(self.buffer) < max(cfg.warmup_transitions, cfg.batch_size):
            return None
        batch = self.buffer.sample(cfg.batch_size, self.rng)
        return train_step(
            self.online, self.target, batch, cfg.discount, cfg.n_step, self.optimizer
        )

    # -- checkpointing --------------------------------------------------

    def save(self, path: str | Path) -> None:
        doc = {
            "version": 1,
            "config": asdict(self.config),
            "config_hash": config_hash(self.config),
            "input_dim": self.input_dim,
            "num_actions": self.num_actions,
            "seed": self.seed,
            "training_steps": self.training_steps,
            "action_count": self.action_count,
            "online": _weights_to_lists(self.online),
            "target": _weights_to_lists(self.target),
        }
        Path(path).write_text(json.dumps(doc), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "DdqnAgent":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        if doc.get("version") != 1:
            raise ValueError(f"unsupported checkpoint version {doc.get('version')}")
        raw = dict(doc["config"])
        raw["hidden_sizes"] = tuple(raw["hidden_sizes"])
        config = AgentConfig(**raw)
        agent = cls(config, doc["input_dim"], doc["num_actions"], seed=doc["seed"])
        _lists_to_weights(agent.online, doc["online"])
        _lists_to_weights(agent.target, doc["target"])
        agent.training_steps = doc["training_steps"]
        agent.action_count = doc["action_count"]
        return agent


def config_hash(config: AgentConfig) -> str:
    text = json.dumps(asdict(config), sort_keys=True)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _weights_to_lists(net: QNetwork) -> dict:
    return {name: t.detach().numpy().tolist() for name, t in net.state_dict().items()}


def _lists_to_weights(net: QNetwork, doc: dict) -> None:
    state = {
        name: torch.tensor(values, dtype=torch.float64)
        for name, values in doc.items()
    }
    net.load_state_dict(state)


@dataclass
class TrainingResult:
    agent: DdqnAgent
    records: list[dict] = field(default_factory=list)
    episodes_run: int = 0
    first_success_episode: int | None = None
    first_accurate_episode: int | None = None
    best_error: float = float("inf")
    min_accurate_depth: int | None = None
    min_accurate_gates: int | None = None


def training_loop(
    env: VqeEnvironment,
    agent: DdqnAgent,
    episodes: int,
    controller=None,
    eval_reference: float | None = None,
    accuracy_window: float | None = None,
    stop_on_accuracy: bool = False,
    on_episode=None,
) -> TrainingResult:
    """Alternate learning and greedy test episodes for a number of rounds.

    After each learning episode the curriculum controller (when given)
    observes the episode's best error and success flag and supplies the next
    threshold.  eval_reference is the energy against which accuracy metrics
    are scored (normally the exact ground energy); accuracy_window is the
    error below which a circuit counts as accurate for those metrics.
    on_episode, when given, receives each per-episode record dict.
    """
    cfg = agent.config
    e_ref = env.config.reference_energy
    offset = e_ref if cfg.standardize_energy else 0.0
    result = TrainingResult(agent=agent)

    def consider_circuit(circuit, energy: float, episode: int) -> None:
        if eval_reference is None:
            return
        error = energy - eval_reference
        result.best_error = min(result.best_error, error)
        if accuracy_window is not None and error < accuracy_window:
            d, g = depth(circuit), gate_count(circuit)
            result.min_accurate_depth = (
                d
                if result.min_accurate_depth is None
                else min(result.min_accurate_depth, d)
            )
            result.min_accurate_gates = (
                g
                if result.min_accurate_gates is None
                else min(result.min_accurate_gates, g)
            )
            if result.first_accurate_episode is None:
                result.first_accurate_episode = episode

    for episode in range(1, episodes + 1):
        threshold = controller.xi if controller is not None else None

        # -- learning phase ---------------------------------------------
        state = env.reset(threshold=threshold)
        xi = env.threshold
        assembler = _NStepAssembler(cfg.n_step, cfg.discount)
        encoding = encode_state(state, env.num_qubits, offset)
        rewards: list[float] = []
        min_error = float("inf")
        while not env.done:
            action = agent.act(encoding)
            outcome = env.step(action)
            next_encoding = encode_state(outcome.next_state, env.num_qubits, offset)
            rewards.append(outcome.reward)
            min_error = min(min_error, outcome.info["E_t"] - e_ref)
            consider_circuit(outcome.next_state, outcome.info["E_t"], episode)
            transitions = assembler.push(
                encoding, action, outcome.reward, next_encoding, outcome.done
            )
            for tr in transitions:
                agent.buffer.push(tr)
            agent.observe_training_step()
            agent.maybe_train()
            encoding = next_encoding
        train_success = bool(rewards and rewards[-1] == SUCCESS_REWARD)
        train_final = env.state.energy
        train_record = {
            "episode": episode,
            "phase": "train",
            "steps": len(rewards),
            "rewards_total": float(sum(rewards)),
            "final_energy": train_final,
            "final_error": train_final - e_ref,
            "min_error": min_error,
            "depth": depth(env.state),
            "gate_count": gate_count(env.state),
            "success": train_success,
            "epsilon": agent.epsilon,
            "xi": xi,
            "delta": controller.delta if controller is not None else None,
        }

        # -- test phase: greedy policy, experience discarded -------------
        env.reset(threshold=xi)
        test_encoding = encode_state(env.state, env.num_qubits, offset)
        test_rewards: list[float] = []
        test_min_error = float("inf")
        while not env.done:
            outcome = env.step(agent.act(test_encoding, greedy=True))
            test_rewards.append(outcome.reward)
            test_min_error = min(test_min_error, outcome.info["E_t"] - e_ref)
            consider_circuit(outcome.next_state, outcome.info["E_t"], episode)
            test_encoding = encode_state(outcome.next_state, env.num_qubits, offset)
        test_record = {
            "episode": episode,
            "phase": "test",
            "steps": len(test_rewards),
            "rewards_total": float(sum(test_rewards)),
            "final_energy": env.state.energy,
            "final_error": env.state.energy - e_ref,
            "min_error": test_min_error,
            "depth": depth(env.state),
            "gate_count": gate_count(env.state),
            "success": bool(test_rewards and test_rewards[-1] == SUCCESS_REWARD),
            "epsilon": 0.0,
            "xi": xi,
            "delta": controller.delta if controller is not None else None,
        }

        for record in (train_record, test_record):
            result.records.append(record)
            if on_episode is not None:
                on_episode(record)
        result.episodes_run = episode
        if train_success and result.first_success_episode is None:
            result.first_success_episode = episode
        if controller is not None:
            controller.on_episode_end(min_error, train_success)
        if stop_on_accuracy and result.first_accurate_episode is not None:
            break
    return result
