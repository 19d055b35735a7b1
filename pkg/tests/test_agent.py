import json

import numpy as np
import pytest
import torch

from rlvqe import (
    AgentConfig,
    DdqnAgent,
    EnvConfig,
    QNetwork,
    ReplayBuffer,
    Transition,
    VqeEnvironment,
    bundled_hamiltonian,
    exact_ground_energy,
    select_action,
    train_step,
    training_loop,
)
from rlvqe.agent import _NStepAssembler, copy_weights, weights_digest


def make_transition(rng, dim=5, n_actions=3, done=True):
    return Transition(
        state=rng.normal(size=dim),
        action=int(rng.integers(n_actions)),
        return_=float(rng.normal()),
        bootstrap_state=None if done else rng.normal(size=dim),
        done=done,
    )


def toy_env(threshold=0.005, max_slots=6, **kwargs):
    h = bundled_hamiltonian("toy2q")
    return VqeEnvironment(
        EnvConfig(
            hamiltonian=h,
            max_slots=max_slots,
            reference_energy=exact_ground_energy(h),
            threshold=threshold,
            **kwargs,
        )
    )


class TestEpsilonSchedule:
    def test_closed_form_exact(self):
        agent = DdqnAgent(AgentConfig(), input_dim=25, num_actions=8, seed=0)
        for k in range(1, 2001):
            agent.training_steps = k
            assert agent.epsilon == max(0.05, 0.99995**k)

    def test_floor(self):
        agent = DdqnAgent(AgentConfig(), input_dim=25, num_actions=8, seed=0)
        agent.training_steps = 10_000_000
        assert agent.epsilon == 0.05


class TestReplayBuffer:
    def test_fifo_eviction_at_full_capacity(self):
        rng = np.random.default_rng(0)
        buffer = ReplayBuffer(capacity=20_000)
        transitions = [make_transition(rng) for _ in range(20_005)]
        for tr in transitions:
            buffer.push(tr)
        assert len(buffer) == 20_000
        stored = list(buffer)
        assert stored[0] is transitions[5]  # first five evicted, oldest first
        assert stored[-1] is transitions[-1]

    def test_never_exceeds_capacity(self):
        rng = np.random.default_rng(1)
        buffer = ReplayBuffer(capacity=7)
        for i in range(50):
            buffer.push(make_transition(rng))
            assert len(buffer) <= 7

    def test_sample_requires_enough_entries(self):
        rng = np.random.default_rng(2)
        buffer = ReplayBuffer(capacity=10)
        buffer.push(make_transition(rng))
        with pytest.raises(ValueError):
            buffer.sample(2, rng)


class TestSelectAction:
    def test_greedy_is_argmax_and_deterministic(self):
        net = QNetwork(4, 6, hidden_sizes=(8,), seed=5)
        rng = np.random.default_rng(3)
        state = rng.normal(size=4)
        expected = int(np.argmax(net.q_values(state)))
        for _ in range(10):
            assert select_action(net, state, 0.0, rng) == expected

    def test_ties_break_to_lowest_index(self):
        net = QNetwork(4, 6, hidden_sizes=(8,), seed=5)
        with torch.no_grad():
            for p in net.parameters():
                p.zero_()  # all Q-values identical
        rng = np.random.default_rng(4)
        assert select_action(net, np.ones(4), 0.0, rng) == 0

    def test_uniform_at_epsilon_one(self):
        net = QNetwork(4, 6, hidden_sizes=(8,), seed=5)
        rng = np.random.default_rng(6)
        draws = 10_000
        counts = np.bincount(
            [select_action(net, np.ones(4), 1.0, rng) for _ in range(draws)],
            minlength=6,
        )
        expected = draws / 6
        sigma = np.sqrt(draws * (1 / 6) * (5 / 6))
        assert np.all(np.abs(counts - expected) < 3 * sigma)

    def test_epsilon_validated(self):
        net = QNetwork(4, 6, hidden_sizes=(8,), seed=5)
        with pytest.raises(ValueError):
            select_action(net, np.ones(4), 1.5, np.random.default_rng(0))


class TestTrainStep:
    def _nets(self, dim=5, actions=3, hidden=(4,), seed=11):
        online = QNetwork(dim, actions, hidden, seed=seed)
        target = QNetwork(dim, actions, hidden, seed=seed + 1)
        return online, target

    def test_all_terminal_targets_equal_returns(self):
        rng = np.random.default_rng(13)
        online, target = self._nets()
        batch = [make_transition(rng, done=True) for _ in range(8)]
        states = torch.from_numpy(np.stack([t.state for t in batch]))
        actions = torch.tensor([t.action for t in batch])
        with torch.no_grad():
            predicted = online(states).gather(1, actions.unsqueeze(1)).squeeze(1)
        returns = torch.tensor([t.return_ for t in batch], dtype=torch.float64)
        expected_loss = float(torch.mean((predicted - returns) ** 2))
        optimizer = torch.optim.Adam(online.parameters(), lr=1e-3)
        loss = train_step(online, target, batch, gamma=0.9, n_step=3,
                          optimizer=optimizer)
        assert loss == pytest.approx(expected_loss, rel=1e-12)

    def test_gamma_zero_targets_equal_returns(self):
        rng = np.random.default_rng(17)
        online, target = self._nets()
        batch = [make_transition(rng, done=bool(i % 2)) for i in range(8)]
        states = torch.from_numpy(np.stack([t.state for t in batch]))
        actions = torch.tensor([t.action for t in batch])
        with torch.no_grad():
            predicted = online(states).gather(1, actions.unsqueeze(1)).squeeze(1)
        returns = torch.tensor([t.return_ for t in batch], dtype=torch.float64)
        expected_loss = float(torch.mean((predicted - returns) ** 2))
        optimizer = torch.optim.Adam(online.parameters(), lr=1e-3)
        loss = train_step(online, target, batch, gamma=0.0, n_step=4,
                          optimizer=optimizer)
        assert loss == pytest.approx(expected_loss, rel=1e-12)

    def test_double_q_target_formula(self):
        rng = np.random.default_rng(19)
        online, target = self._nets()
        tr = make_transition(rng, done=False)
        boot = torch.from_numpy(tr.bootstrap_state)
        gamma, n = 0.88, 6
        with torch.no_grad():
            best = int(online(boot).argmax())
            expected_target = tr.return_ + gamma**n * float(target(boot)[best])
            state = torch.from_numpy(tr.state)
            predicted = float(online(state)[tr.action])
        expected_loss = (predicted - expected_target) ** 2
        optimizer = torch.optim.Adam(online.parameters(), lr=1e-3)
        loss = train_step(online, target, [tr], gamma, n, optimizer)
        assert loss == pytest.approx(expected_loss, rel=1e-12)

    def test_empty_batch_rejected(self):
        online, target = self._nets()
        optimizer = torch.optim.Adam(online.parameters(), lr=1e-3)
        with pytest.raises(ValueError):
            train_step(online, target, [], 0.9, 1, optimizer)


class TestGradients:
    @staticmethod
    def _loss_fn(net, batch):
        states = torch.from_numpy(np.stack([t.state for t in batch]))
        actions = torch.tensor([t.action for t in batch])
        returns = torch.tensor([t.return_ for t in batch], dtype=torch.float64)
        predicted = net(states).gather(1, actions.unsqueeze(1)).squeeze(1)
        return torch.mean((predicted - returns) ** 2)

    def _check(self, net, batch, tolerance):
        loss = self._loss_fn(net, batch)
        net.zero_grad()
        loss.backward()
        h = 1e-6
        for param in net.parameters():
            grad = param.grad.clone()
            flat = param.data.view(-1)
            for i in range(flat.numel()):
                original = float(flat[i])
                with torch.no_grad():
                    flat[i] = original + h
                    up = float(self._loss_fn(net, batch))
                    flat[i] = original - h
                    down = float(self._loss_fn(net, batch))
                    flat[i] = original
                fd = (up - down) / (2 * h)
                auto = float(grad.view(-1)[i])
                scale = max(abs(fd), abs(auto), 1e-8)
                assert abs(fd - auto) / scale < tolerance

    def test_one_hidden_unit_single_transition(self):
        rng = np.random.default_rng(23)
        net = QNetwork(2, 2, hidden_sizes=(1,), seed=29)
        batch = [make_transition(rng, dim=2, n_actions=2, done=True)]
        self._check(net, batch, tolerance=1e-5)

    def test_random_small_networks(self):
        rng = np.random.default_rng(31)
        for seed in (37, 41, 43):
            net = QNetwork(5, 3, hidden_sizes=(2,), seed=seed)
            batch = [make_transition(rng, dim=5, n_actions=3, done=True)
                     for _ in range(4)]
            self._check(net, batch, tolerance=1e-4)


class TestNStepAssembler:
    def test_n1_degenerates_to_single_reward(self):
        rng = np.random.default_rng(47)
        assembler = _NStepAssembler(n_step=1, gamma=0.88)
        states = [rng.normal(size=3) for _ in range(4)]
        rewards = [0.3, -1.0, 0.7]
        collected = []
        for i, r in enumerate(rewards):
            done = i == len(rewards) - 1
            collected += assembler.push(states[i], i, r, states[i + 1], done)
        assert len(collected) == 3
        for i, tr in enumerate(collected):
            assert tr.return_ == rewards[i]
            assert tr.done == (i == 2)
            if not tr.done:
                assert np.array_equal(tr.bootstrap_state, states[i + 1])

    def test_six_step_returns_truncate_at_terminal(self):
        gamma = 0.88
        assembler = _NStepAssembler(n_step=6, gamma=gamma)
        rewards = [1.0, 2.0, 3.0]
        states = [np.full(2, float(i)) for i in range(4)]
        collected = []
        for i, r in enumerate(rewards):
            done = i == len(rewards) - 1
            collected += assembler.push(states[i], i, r, states[i + 1], done)
        # Episode shorter than n: everything flushes at the terminal.
        assert len(collected) == 3
        assert all(tr.done for tr in collected)
        assert collected[0].return_ == pytest.approx(
            1.0 + gamma * 2.0 + gamma**2 * 3.0
        )
        assert collected[1].return_ == pytest.approx(2.0 + gamma * 3.0)
        assert collected[2].return_ == pytest.approx(3.0)

    def test_full_window_bootstraps_n_ahead(self):
        gamma = 0.5
        assembler = _NStepAssembler(n_step=2, gamma=gamma)
        states = [np.full(2, float(i)) for i in range(5)]
        rewards = [1.0, 1.0, 1.0, 1.0]
        collected = []
        for i, r in enumerate(rewards):
            done = i == len(rewards) - 1
            collected += assembler.push(states[i], i, r, states[i + 1], done)
        # Windows at t=0 and t=1 mature with bootstrap; the rest terminate.
        assert [tr.done for tr in collected] == [False, False, True, True]
        assert np.array_equal(collected[0].bootstrap_state, states[2])
        assert np.array_equal(collected[1].bootstrap_state, states[3])
        assert collected[0].return_ == pytest.approx(1.0 + gamma)


class TestTargetSync:
    def test_sync_every_500_actions(self):
        config = AgentConfig(warmup_transitions=10, batch_size=4)
        agent = DdqnAgent(config, input_dim=5, num_actions=3, seed=51)
        rng = np.random.default_rng(53)
        for tr in (make_transition(rng, dim=5) for _ in range(64)):
            agent.buffer.push(tr)
        snapshot = weights_digest(agent.online)
        assert weights_digest(agent.target) == snapshot  # initial copy
        for step in range(1, 1001):
            agent.observe_training_step()
            if step % 500 == 0:
                # The sync just fired: the target is this action's snapshot.
                snapshot = weights_digest(agent.online)
            agent.maybe_train()  # mutates online every step
            assert weights_digest(agent.target) == snapshot
            if step % 100 == 17:
                assert weights_digest(agent.online) != snapshot


class TestTrainingLoop:
    def test_zero_episodes(self):
        env = toy_env()
        agent = DdqnAgent(AgentConfig(), input_dim=25, num_actions=8, seed=0)
        result = training_loop(env, agent, episodes=0)
        assert result.records == []
        assert result.episodes_run == 0

    def test_bit_identical_records_for_fixed_seed(self):
        def run():
            env = toy_env()
            agent = DdqnAgent(
                AgentConfig(warmup_transitions=20),
                input_dim=25,
                num_actions=8,
                seed=77,
            )
            result = training_loop(env, agent, episodes=12)
            return json.dumps(result.records, sort_keys=True)

        assert run() == run()

    def test_test_phase_writes_no_buffer_entries(self):
        env = toy_env()
        config = AgentConfig(warmup_transitions=10_000)  # never train
        agent = DdqnAgent(config, input_dim=25, num_actions=8, seed=5)
        result = training_loop(env, agent, episodes=10)
        train_steps = sum(
            r["steps"] for r in result.records if r["phase"] == "train"
        )
        assert len(agent.buffer) == train_steps
        assert agent.training_steps == train_steps

    def test_alternates_phases(self):
        env = toy_env()
        agent = DdqnAgent(AgentConfig(), input_dim=25, num_actions=8, seed=9)
        result = training_loop(env, agent, episodes=3)
        phases = [r["phase"] for r in result.records]
        assert phases == ["train", "test"] * 3
        for r in result.records:
            if r["phase"] == "test":
                assert r["epsilon"] == 0.0

    def test_toy_convergence_fixed_threshold(self):
        # Ten seeds on the 2-qubit toy problem with the threshold fixed at
        # 0.0016 above the oracle ground energy: at least 8 must reach a
        # success episode well inside the 5000-episode budget.
        h = bundled_hamiltonian("toy2q")
        exact = exact_ground_energy(h)
        successes = 0
        for seed in range(10):
            env = toy_env(threshold=0.0016)
            agent = DdqnAgent(
                AgentConfig(warmup_transitions=100),
                input_dim=25,
                num_actions=8,
                seed=seed,
            )
            result = training_loop(
                env,
                agent,
                episodes=5000,
                eval_reference=exact,
                accuracy_window=0.0016,
                stop_on_accuracy=True,
            )
            if result.first_success_episode is not None:
                assert result.first_success_episode <= 5000
                successes += 1
        assert successes >= 8


class TestCheckpoint:
    def test_round_trip(self, tmp_path):
        agent = DdqnAgent(AgentConfig(), input_dim=25, num_actions=8, seed=13)
        agent.training_steps = 321
        agent.action_count = 321
        path = tmp_path / "agent.json"
        agent.save(path)
        loaded = DdqnAgent.load(path)
        assert weights_digest(loaded.online) == weights_digest(agent.online)
        assert weights_digest(loaded.target) == weights_digest(agent.target)
        assert loaded.training_steps == 321
        assert loaded.config == agent.config
        doc = json.loads(path.read_text())
        assert doc["version"] == 1
        assert "config_hash" in doc

    def test_copy_weights(self):
        a = QNetwork(3, 2, hidden_sizes=(4,), seed=1)
        b = QNetwork(3, 2, hidden_sizes=(4,), seed=2)
        assert weights_digest(a) != weights_digest(b)
        copy_weights(a, b)
        assert weights_digest(a) == weights_digest(b)
