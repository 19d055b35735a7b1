import numpy as np
import pytest

from rlvqe import (
    GateSpec,
    PauliHamiltonian,
    apply_circuit,
    apply_gate,
    expectation,
    zero_state,
)

from oracles import (
    dense_expectation,
    dense_hamiltonian,
    dense_state,
    gate_tuple,
    random_gate_tuples,
    random_hamiltonian_terms,
)


def build_gates(tuples):
    out = []
    for kind, target, control, angle in tuples:
        if kind == "CNOT":
            out.append(GateSpec("CNOT", target=target, control=control))
        else:
            out.append(GateSpec(kind, target=target, angle=angle))
    return out


class TestZeroState:
    def test_one_qubit(self):
        assert np.array_equal(zero_state(1).amplitudes, [1, 0])

    def test_two_qubits(self):
        assert np.array_equal(zero_state(2).amplitudes, [1, 0, 0, 0])

    def test_cap(self):
        with pytest.raises(ValueError):
            zero_state(25)
        with pytest.raises(ValueError):
            zero_state(0)


class TestApplyGate:
    def test_rx_pi_on_zero(self):
        out = apply_gate(zero_state(1), GateSpec("RX", target=0, angle=np.pi))
        assert np.allclose(out.amplitudes, [0, -1j], atol=1e-12)

    def test_ry_half_angle_form(self):
        theta = 0.731
        out = apply_gate(zero_state(1), GateSpec("RY", target=0, angle=theta))
        assert np.allclose(
            out.amplitudes, [np.cos(theta / 2), np.sin(theta / 2)], atol=1e-12
        )

    def test_cnot_truth_table_little_endian(self):
        # |01> in little-endian means qubit 0 is set: amplitude index 1.
        state = apply_gate(zero_state(2), GateSpec("RX", target=0, angle=np.pi))
        out = apply_gate(state, GateSpec("CNOT", target=1, control=0))
        assert np.argmax(np.abs(out.amplitudes)) == 3  # |11>

    def test_cnot_control_clear_is_identity(self):
        out = apply_gate(zero_state(2), GateSpec("CNOT", target=1, control=0))
        assert np.array_equal(out.amplitudes, [1, 0, 0, 0])

    def test_index_out_of_range(self):
        with pytest.raises(ValueError):
            apply_gate(zero_state(2), GateSpec("RX", target=2, angle=0.1))

    def test_gatespec_validation(self):
        with pytest.raises(ValueError):
            GateSpec("CNOT", target=0, control=0)
        with pytest.raises(ValueError):
            GateSpec("RX", target=0)  # missing angle
        with pytest.raises(ValueError):
            GateSpec("HADAMARD", target=0, angle=0.0)

    def test_matches_dense_oracle_on_random_circuits(self):
        rng = np.random.default_rng(3)
        for _ in range(25):
            n = int(rng.integers(1, 4))
            tuples = random_gate_tuples(rng, n, int(rng.integers(1, 10)))
            psi = apply_circuit(build_gates(tuples), n).amplitudes
            oracle = dense_state(tuples, n)
            assert np.allclose(psi, oracle, atol=1e-10)


class TestNormAndPeriodicity:
    def test_norm_preserved_over_long_sequences(self):
        rng = np.random.default_rng(17)
        tuples = random_gate_tuples(rng, 3, 1000)
        psi = apply_circuit(build_gates(tuples), 3).amplitudes
        assert abs(np.sum(np.abs(psi) ** 2) - 1.0) < 1e-9

    def test_rotation_periodicity_global_phase(self):
        rng = np.random.default_rng(29)
        for kind in ("RX", "RY", "RZ"):
            theta = float(rng.uniform(0, 2 * np.pi))
            prefix = build_gates(random_gate_tuples(rng, 2, 4))
            base = apply_circuit(prefix, 2)
            a = apply_gate(base, GateSpec(kind, target=1, angle=theta))
            b = apply_gate(base, GateSpec(kind, target=1, angle=theta + 2 * np.pi))
            fidelity = abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2
            assert fidelity > 1 - 1e-12

    def test_expectation_two_pi_periodic(self):
        h = PauliHamiltonian.from_terms([(0.8, "ZX"), (-0.4, "YI")])
        rng = np.random.default_rng(31)
        prefix = build_gates(random_gate_tuples(rng, 2, 3))
        base = apply_circuit(prefix, 2)
        for theta in rng.uniform(0, 2 * np.pi, size=5):
            e1 = expectation(apply_gate(base, GateSpec("RY", 0, angle=theta)), h)
            e2 = expectation(
                apply_gate(base, GateSpec("RY", 0, angle=theta + 2 * np.pi)), h
            )
            assert abs(e1 - e2) < 1e-10


class TestExpectation:
    def test_zero_state_z(self):
        h = PauliHamiltonian.from_terms([(1.0, "Z")])
        assert expectation(zero_state(1), h) == pytest.approx(1.0, abs=1e-12)

    def test_equator_state_z(self):
        h = PauliHamiltonian.from_terms([(1.0, "Z")])
        state = apply_gate(zero_state(1), GateSpec("RY", 0, angle=np.pi / 2))
        assert expectation(state, h) == pytest.approx(0.0, abs=1e-12)

    def test_matches_dense_oracle(self):
        rng = np.random.default_rng(41)
        for _ in range(25):
            n = 3
            tuples = random_gate_tuples(rng, n, int(rng.integers(1, 12)))
            terms = random_hamiltonian_terms(rng, n, int(rng.integers(1, 8)))
            state = apply_circuit(build_gates(tuples), n)
            ours = expectation(state, PauliHamiltonian.from_terms(terms))
            oracle = dense_expectation(
                dense_state(tuples, n), dense_hamiltonian(terms, n)
            )
            assert ours == pytest.approx(oracle, abs=1e-10)

    def test_linear_in_coefficients(self):
        rng = np.random.default_rng(43)
        terms_a = random_hamiltonian_terms(rng, 2, 4)
        terms_b = random_hamiltonian_terms(rng, 2, 4)
        state = apply_circuit(build_gates(random_gate_tuples(rng, 2, 6)), 2)
        alpha, beta = 1.7, -0.3
        combined = PauliHamiltonian.from_terms(
            [(alpha * c, s) for c, s in terms_a]
            + [(beta * c, s) for c, s in terms_b]
        )
        e_a = expectation(state, PauliHamiltonian.from_terms(terms_a))
        e_b = expectation(state, PauliHamiltonian.from_terms(terms_b))
        assert expectation(state, combined) == pytest.approx(
            alpha * e_a + beta * e_b, abs=1e-10
        )

    def test_qubit_mismatch(self):
        h = PauliHamiltonian.from_terms([(1.0, "ZZ")])
        with pytest.raises(ValueError):
            expectation(zero_state(3), h)

    def test_single_angle_energy_is_sinusoid(self):
        # A 3-point fit must reproduce a dense sweep; this underwrites the
        # closed-form per-angle minimizer.
        rng = np.random.default_rng(47)
        for _ in range(5):
            n = 3
            tuples = random_gate_tuples(rng, n, 6)
            rot_positions = [i for i, t in enumerate(tuples) if t[0] != "CNOT"]
            if not rot_positions:
                continue
            pos = int(rng.choice(rot_positions))
            terms = random_hamiltonian_terms(rng, n, 5)
            h = PauliHamiltonian.from_terms(terms)

            def energy(theta):
                work = list(tuples)
                kind, target, control, _ = work[pos]
                work[pos] = (kind, target, control, theta)
                return expectation(apply_circuit(build_gates(work), n), h)

            m1, m2, m3 = energy(0.0), energy(np.pi / 2), energy(-np.pi / 2)
            offset = 0.5 * (m2 + m3)
            a_sin = m1 - offset
            a_cos = 0.5 * (m2 - m3)
            sweep = np.linspace(0, 2 * np.pi, 100)
            fitted = offset + a_sin * np.cos(sweep) + a_cos * np.sin(sweep)
            actual = np.array([energy(t) for t in sweep])
            assert np.max(np.abs(fitted - actual)) < 1e-9
