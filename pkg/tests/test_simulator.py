import numpy as np
import pytest

from qaoabench.exceptions import CapacityError, ConfigError
from qaoabench.simulator import (
    Circuit,
    Gate,
    StateVector,
    adjoint_gradient,
    apply_gate,
    bitstring_to_index,
    expectation_z,
    expectation_zz,
    index_to_bitstring,
    init_plus_state,
    init_zero_state,
    run_circuit,
    sample_bitstrings,
)

import oracles


def random_state(n, rng):
    amps = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    amps /= np.linalg.norm(amps)
    return StateVector(n, amps)


def random_gate(n, rng, parameterized_only=False):
    kinds = ["RX", "RY", "RZ", "ZZ"] if parameterized_only else list(("H", "RX", "RY", "RZ", "CNOT", "ZZ"))
    if n < 2:
        kinds = [k for k in kinds if k not in ("CNOT", "ZZ")]
    kind = kinds[rng.integers(len(kinds))]
    if kind in ("CNOT", "ZZ"):
        q = tuple(rng.choice(n, size=2, replace=False).tolist())
    else:
        q = (int(rng.integers(n)),)
    angle = float(rng.uniform(-np.pi, np.pi)) if kind not in ("H", "CNOT") else None
    return Gate(kind, q, angle)


class TestInitStates:
    def test_plus_state_n1(self):
        s = init_plus_state(1)
        np.testing.assert_allclose(s.amplitudes, [0.7071067811865476] * 2, atol=1e-12)

    def test_plus_state_n2(self):
        s = init_plus_state(2)
        np.testing.assert_allclose(s.amplitudes, [0.5] * 4, atol=1e-12)

    def test_plus_state_n10(self):
        s = init_plus_state(10)
        assert s.amplitudes.size == 1024
        np.testing.assert_allclose(s.amplitudes, 2.0 ** -5, atol=1e-15)
        assert abs(s.norm() - 1.0) < 1e-12

    @pytest.mark.parametrize("n", [0, -1, 25])
    def test_capacity(self, n):
        with pytest.raises(CapacityError):
            init_plus_state(n)


class TestApplyGate:
    def test_h_on_zero(self):
        s = apply_gate(init_zero_state(1), Gate("H", (0,)))
        np.testing.assert_allclose(s.amplitudes, [0.7071067811865476] * 2, atol=1e-12)

    def test_ry_pi_flips(self):
        s = apply_gate(init_zero_state(1), Gate("RY", (0,), np.pi))
        assert abs(abs(s.amplitudes[1]) - 1.0) < 1e-12

    def test_cnot_truth_table(self):
        # |10> with qubit 0 leftmost: qubit 0 set -> index 1
        s = init_zero_state(2)
        s.amplitudes[:] = 0
        s.amplitudes[bitstring_to_index("10")] = 1.0
        apply_gate(s, Gate("CNOT", (0, 1)))
        assert abs(s.amplitudes[bitstring_to_index("11")] - 1.0) < 1e-12

    def test_index_error(self):
        with pytest.raises(IndexError):
            apply_gate(init_zero_state(2), Gate("RX", (2,), 0.1))

    @pytest.mark.parametrize("seed", range(8))
    def test_matches_dense_oracle(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 5))
        state = random_state(n, rng)
        gate = random_gate(n, rng)
        expected = oracles.gate_matrix(n, gate) @ state.amplitudes
        apply_gate(state, gate)
        np.testing.assert_allclose(state.amplitudes, expected, atol=1e-12)

    def test_norm_conserved_long_sequence(self):
        # 1e4 random gates; norm drift must stay under 1e-9
        rng = np.random.default_rng(7)
        state = init_plus_state(10)
        for _ in range(10_000):
            apply_gate(state, random_gate(10, rng))
        assert abs(state.norm() - 1.0) < 1e-9


class TestExpectations:
    def test_plus_state_zz_zero(self):
        s = init_plus_state(4)
        val = expectation_zz(s, [(0, 1, 1.0), (1, 3, -2.0), (0, 2, 0.5)])
        assert abs(val) < 1e-12

    def test_zero_state_zz(self):
        assert expectation_zz(init_zero_state(2), [(0, 1, 1.0)]) == pytest.approx(1.0)

    @pytest.mark.parametrize("seed", range(12))
    def test_matches_kron_oracle(self, seed):
        rng = np.random.default_rng(100 + seed)
        n = 4
        state = random_state(n, rng)
        couplings = [
            (i, j, float(rng.normal()))
            for i in range(n)
            for j in range(i + 1, n)
            if rng.random() < 0.7
        ]
        ham = oracles.zz_hamiltonian(n, couplings)
        expected = float(np.real(np.vdot(state.amplitudes, ham @ state.amplitudes)))
        assert expectation_zz(state, couplings) == pytest.approx(expected, abs=1e-10)

    def test_oracle_equivalence_sweep(self):
        # 100 random (state, coupling) pairs for n <= 6, tolerance 1e-10
        rng = np.random.default_rng(4242)
        for _ in range(100):
            n = int(rng.integers(2, 7))
            state = random_state(n, rng)
            couplings = [
                (i, j, float(rng.normal()))
                for i in range(n)
                for j in range(i + 1, n)
                if rng.random() < 0.6
            ]
            ham = oracles.zz_hamiltonian(n, couplings)
            expected = float(np.real(np.vdot(state.amplitudes, ham @ state.amplitudes)))
            assert abs(expectation_zz(state, couplings) - expected) < 1e-10

    def test_expectation_z(self):
        assert expectation_z(init_zero_state(1), 0) == pytest.approx(1.0)
        one = apply_gate(init_zero_state(1), Gate("RY", (0,), np.pi))
        assert expectation_z(one, 0) == pytest.approx(-1.0, abs=1e-12)
        assert abs(expectation_z(init_plus_state(1), 0)) < 1e-12

    def test_expectation_index_error(self):
        with pytest.raises(IndexError):
            expectation_z(init_zero_state(2), 5)


class TestSampling:
    def test_deterministic_state(self):
        samples = sample_bitstrings(init_zero_state(3), 100, np.random.default_rng(0))
        assert samples == ["000"] * 100

    def test_plus_frequency(self):
        samples = sample_bitstrings(init_plus_state(1), 10_000, np.random.default_rng(11))
        freq0 = samples.count("0") / 10_000
        assert abs(freq0 - 0.5) < 0.02

    def test_seed_determinism(self):
        state = apply_gate(init_plus_state(3), Gate("RY", (1,), 0.7))
        a = sample_bitstrings(state, 500, np.random.default_rng(5))
        b = sample_bitstrings(state, 500, np.random.default_rng(5))
        assert a == b

    def test_total_variation(self):
        # empirical vs Born distribution over 1e5 shots, TV < 0.01
        rng = np.random.default_rng(21)
        state = random_state(4, rng)
        samples = sample_bitstrings(state, 100_000, np.random.default_rng(99))
        counts = np.zeros(16)
        for s in samples:
            counts[bitstring_to_index(s)] += 1
        tv = 0.5 * np.abs(counts / 100_000 - state.probabilities()).sum()
        assert tv < 0.01


class TestAdjointGradient:
    def test_empty_circuit(self):
        circ = Circuit(2, [Gate("H", (0,)), Gate("CNOT", (0, 1))])
        grads = adjoint_gradient(circ, init_zero_state(2), [(0, 1, 1.0)])
        assert grads.size == 0

    def test_single_ry_analytic(self):
        theta = 0.3
        circ = Circuit(1, [Gate("RY", (0,), theta)], {0: [(0, 1.0)]})
        grads = adjoint_gradient(circ, init_zero_state(1), [(0, 1.0)])
        assert grads[0] == pytest.approx(-np.sin(theta), abs=1e-10)

    def test_malformed_slots(self):
        circ = Circuit(1, [Gate("H", (0,))], {0: [(0, 1.0)]})
        with pytest.raises(ConfigError):
            adjoint_gradient(circ, init_zero_state(1), [(0, 1.0)])
        circ = Circuit(1, [Gate("RY", (0,), 0.1)], {0: [(5, 1.0)]})
        with pytest.raises(ConfigError):
            adjoint_gradient(circ, init_zero_state(1), [(0, 1.0)])

    def test_shared_slot_coefficients(self):
        # one parameter driving two RY gates with coefficients 1 and 2:
        # <Z> = cos(3 theta), d/dtheta = -3 sin(3 theta)
        theta = 0.4
        circ = Circuit(
            1,
            [Gate("RY", (0,), theta), Gate("RY", (0,), 2 * theta)],
            {0: [(0, 1.0), (1, 2.0)]},
        )
        grads = adjoint_gradient(circ, init_zero_state(1), [(0, 1.0)])
        assert grads[0] == pytest.approx(-3 * np.sin(3 * theta), abs=1e-10)

    @pytest.mark.parametrize("seed", range(10))
    def test_matches_finite_differences(self, seed):
        # random circuits, n <= 8, <= 40 gates, 1e-6 relative agreement
        rng = np.random.default_rng(300 + seed)
        n = int(rng.integers(2, 9))
        num_gates = int(rng.integers(10, 41))
        gates = [random_gate(n, rng) for _ in range(num_gates)]
        param_positions = [k for k, g in enumerate(gates) if g.angle is not None]
        slots = {
            s: [(pos, float(rng.uniform(0.5, 2.0)))]
            for s, pos in enumerate(param_positions)
        }
        base_angles = np.array([gates[pos].angle for pos in param_positions])
        coeffs = np.array([slots[s][0][1] for s in range(len(param_positions))])
        thetas = base_angles / coeffs
        couplings = [(i, j, float(rng.normal())) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.5]
        if not couplings:
            couplings = [(0, 1, 1.0)]
        init = init_plus_state(n)

        circ = Circuit(n, gates, slots)
        grads = adjoint_gradient(circ, init, couplings)

        def cost(theta_vec):
            new_gates = list(gates)
            for s, pos in enumerate(param_positions):
                new_gates[pos] = Gate(gates[pos].kind, gates[pos].qubits, coeffs[s] * theta_vec[s])
            state = run_circuit(Circuit(n, new_gates), init)
            return expectation_zz(state, couplings)

        fd = oracles.central_difference(cost, thetas)
        assert oracles.relative_error(grads, fd) < 1e-6


class TestBitstrings:
    def test_round_trip(self):
        for z in range(16):
            assert bitstring_to_index(index_to_bitstring(z, 4)) == z

    def test_qubit0_leftmost(self):
        assert index_to_bitstring(1, 3) == "100"
        assert index_to_bitstring(4, 3) == "001"
