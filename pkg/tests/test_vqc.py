import numpy as np
import pytest

from qaoabench.vqc import VqcConfig, VqcParams, vqc_backward, vqc_circuit, vqc_forward

import oracles


def random_case(rng, n=None, layers=None):
    n = n or int(rng.integers(2, 5))
    layers = layers if layers is not None else int(rng.integers(0, 3))
    cfg = VqcConfig(n, layers, output_size=int(rng.integers(1, n + 1)))
    params = VqcParams(rng.uniform(-np.pi, np.pi, size=(layers, n, 3)))
    v = rng.normal(scale=2.0, size=n)
    return cfg, params, v


class TestForward:
    def test_identity_circuit(self):
        cfg = VqcConfig(3, 2, 3)
        out = vqc_forward(cfg, VqcParams.zeros(cfg), np.zeros(3))
        np.testing.assert_allclose(out, 1.0, atol=1e-12)

    def test_single_qubit_analytic(self):
        # <Z> = cos(arctan(x)) for one qubit, no layers
        cfg = VqcConfig(1, 0, 1)
        params = VqcParams(np.zeros((0, 1, 3)))
        for x in (0.0, 1.0, -2.5, 10.0):
            out = vqc_forward(cfg, params, np.array([x]))
            assert out[0] == pytest.approx(np.cos(np.arctan(x)), abs=1e-12)
        assert vqc_forward(cfg, params, np.array([1.0]))[0] == pytest.approx(0.7071, abs=1e-4)

    @pytest.mark.parametrize("seed", range(6))
    def test_matches_dense_oracle(self, seed):
        rng = np.random.default_rng(40 + seed)
        cfg, params, v = random_case(rng, n=4, layers=2)
        circuit = vqc_circuit(cfg, params, v)
        unitary = oracles.circuit_matrix(4, circuit.gates)
        psi = unitary[:, 0]  # acting on |0000>
        for q in range(cfg.output_size):
            z_op = oracles.one_qubit_op(4, oracles.PAULI_Z, q)
            expected = float(np.real(np.vdot(psi, z_op @ psi)))
            assert vqc_forward(cfg, params, v)[q] == pytest.approx(expected, abs=1e-10)

    def test_outputs_bounded(self):
        rng = np.random.default_rng(77)
        for _ in range(50):
            cfg, params, v = random_case(rng)
            out = vqc_forward(cfg, params, v)
            assert np.all(out >= -1.0 - 1e-12) and np.all(out <= 1.0 + 1e-12)

    def test_encoding_saturation_monotone(self):
        # single qubit, no layers: output decreases monotonically on v in [0, 10]
        cfg = VqcConfig(1, 0, 1)
        params = VqcParams(np.zeros((0, 1, 3)))
        values = [vqc_forward(cfg, params, np.array([x]))[0] for x in np.linspace(0, 10, 30)]
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_dimension_mismatch(self):
        cfg = VqcConfig(3, 1, 2)
        with pytest.raises(ValueError):
            vqc_forward(cfg, VqcParams.zeros(cfg), np.zeros(4))


class TestBackward:
    def test_zero_upstream(self):
        rng = np.random.default_rng(1)
        cfg, params, v = random_case(rng, n=3, layers=1)
        gp, gv = vqc_backward(cfg, params, v, np.zeros(cfg.output_size))
        np.testing.assert_array_equal(gp, 0.0)
        np.testing.assert_array_equal(gv, 0.0)

    def test_input_gradient_zero_at_origin(self):
        # d/dv cos(arctan v) = 0 at v = 0
        cfg = VqcConfig(1, 0, 1)
        params = VqcParams(np.zeros((0, 1, 3)))
        _gp, gv = vqc_backward(cfg, params, np.zeros(1), np.array([1.0]))
        assert abs(gv[0]) < 1e-12

    @pytest.mark.parametrize("seed", range(6))
    def test_matches_finite_differences(self, seed):
        rng = np.random.default_rng(500 + seed)
        cfg, params, v = random_case(rng, n=int(rng.integers(2, 6)), layers=int(rng.integers(1, 3)))
        upstream = rng.normal(size=cfg.output_size)

        gp, gv = vqc_backward(cfg, params, v, upstream)

        def loss_of_angles(flat):
            p = VqcParams(flat.reshape(params.angles.shape))
            return float(upstream @ vqc_forward(cfg, p, v))

        def loss_of_inputs(vin):
            return float(upstream @ vqc_forward(cfg, params, vin))

        fd_params = oracles.central_difference(loss_of_angles, params.angles.ravel())
        fd_inputs = oracles.central_difference(loss_of_inputs, v)
        assert oracles.relative_error(gp.ravel(), fd_params) < 1e-6
        assert oracles.relative_error(gv, fd_inputs) < 1e-6

    def test_directional_derivative_consistency(self):
        # directional FD of the full output vector vs Jacobian-vector contraction
        rng = np.random.default_rng(9)
        cfg, params, v = random_case(rng, n=4, layers=2)
        direction = rng.normal(size=v.shape)
        direction /= np.linalg.norm(direction)
        jac_rows = []
        for q in range(cfg.output_size):
            upstream = np.zeros(cfg.output_size)
            upstream[q] = 1.0
            _gp, gv = vqc_backward(cfg, params, v, upstream)
            jac_rows.append(gv)
        jvp = np.array(jac_rows) @ direction
        eps = 1e-6
        fd = (vqc_forward(cfg, params, v + eps * direction)
              - vqc_forward(cfg, params, v - eps * direction)) / (2 * eps)
        assert oracles.relative_error(jvp, fd) < 1e-6

    def test_upstream_shape_mismatch(self):
        cfg = VqcConfig(3, 1, 2)
        with pytest.raises(ValueError):
            vqc_backward(cfg, VqcParams.zeros(cfg), np.zeros(3), np.zeros(3))


class TestConfig:
    def test_output_size_bounds(self):
        with pytest.raises(ValueError):
            VqcConfig(2, 1, 3)
        with pytest.raises(ValueError):
            VqcConfig(2, 1, 0)

    def test_seeded_init_deterministic(self):
        cfg = VqcConfig(4, 2, 2)
        a = VqcParams.init(cfg, np.random.default_rng(3))
        b = VqcParams.init(cfg, np.random.default_rng(3))
        np.testing.assert_array_equal(a.angles, b.angles)
        assert np.abs(a.angles).max() <= 0.1
