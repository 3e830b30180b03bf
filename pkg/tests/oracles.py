"""Independent dense-matrix oracles used to cross-check the simulator.

Everything here builds full 2^n x 2^n operators by Kronecker products and
never calls the fast statevector paths it is used to verify.
"""

import numpy as np
from scipy.linalg import expm

I2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def one_qubit_op(n, mat, qubit):
    """Embed a 2x2 operator on `qubit` of an n-qubit register (qubit 0 = LSB)."""
    op = np.eye(1, dtype=complex)
    for q in range(n):  # kron builds from the high bits down
        factor = mat if q == qubit else I2
        op = np.kron(factor, op)
    return op


def cnot_matrix(n, control, target):
    dim = 1 << n
    op = np.zeros((dim, dim), dtype=complex)
    for z in range(dim):
        out = z ^ (1 << target) if (z >> control) & 1 else z
        op[out, z] = 1.0
    return op


def zz_hamiltonian(n, couplings):
    """Dense sum of w * Z_i Z_j terms."""
    dim = 1 << n
    ham = np.zeros((dim, dim), dtype=complex)
    for i, j, w in couplings:
        ham += w * one_qubit_op(n, PAULI_Z, i) @ one_qubit_op(n, PAULI_Z, j)
    return ham


def gate_matrix(n, gate):
    """Dense unitary for one simulator Gate."""
    kind = gate.kind
    if kind == "H":
        return one_qubit_op(n, HADAMARD, gate.qubits[0])
    if kind in ("RX", "RY", "RZ"):
        pauli = {"RX": PAULI_X, "RY": PAULI_Y, "RZ": PAULI_Z}[kind]
        return expm(-0.5j * gate.angle * one_qubit_op(n, pauli, gate.qubits[0]))
    if kind == "CNOT":
        return cnot_matrix(n, gate.qubits[0], gate.qubits[1])
    if kind == "ZZ":
        i, j = gate.qubits
        zz = one_qubit_op(n, PAULI_Z, i) @ one_qubit_op(n, PAULI_Z, j)
        return expm(-1j * gate.angle * zz)
    raise ValueError(kind)


def circuit_matrix(n, gates):
    op = np.eye(1 << n, dtype=complex)
    for gate in gates:
        op = gate_matrix(n, gate) @ op
    return op


def qaoa_state_dense(couplings, n, gammas, betas):
    """Matrix-exponential QAOA ansatz: alternating exp(-i g H_C), exp(-i b sum X)."""
    h_cost = zz_hamiltonian(n, couplings)
    h_mix = sum(one_qubit_op(n, PAULI_X, q) for q in range(n))
    psi = np.full(1 << n, 2.0 ** (-n / 2.0), dtype=complex)
    for g, b in zip(gammas, betas):
        psi = expm(-1j * g * h_cost) @ psi
        psi = expm(-1j * b * h_mix) @ psi
    return psi


def central_difference(f, x, step=1e-5):
    """Central finite-difference gradient of a scalar function of a 1-D array."""
    x = np.asarray(x, dtype=float)
    grad = np.zeros_like(x)
    for k in range(x.size):
        up = x.copy()
        dn = x.copy()
        up[k] += step
        dn[k] -= step
        grad[k] = (f(up) - f(dn)) / (2.0 * step)
    return grad


def relative_error(a, b, floor=1.0):
    """Max elementwise |a-b| / max(floor, |b|)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    denom = np.maximum(floor, np.abs(b))
    return float(np.max(np.abs(a - b) / denom)) if a.size else 0.0
