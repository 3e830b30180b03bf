"""Dense statevector simulation with exact expectations and adjoint gradients.

Amplitude ordering is little-endian: qubit 0 is the least significant bit of
the basis index, so the amplitude of |q_{n-1} ... q_1 q_0> sits at index
sum_i q_i 2^i.  Bitstrings rendered as text put qubit 0 in the leftmost
character (see :func:`index_to_bitstring`).

Gate conventions:
    RX/RY/RZ(theta) = exp(-i * theta/2 * P)   for P in {X, Y, Z}
    ZZ(theta, i, j) = exp(-i * theta * Z_i Z_j)
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import CapacityError, ConfigError

MAX_QUBITS = 24  # 2^24 complex doubles ~ 256 MB; the desk-scale ceiling

_SQRT_HALF = 1.0 / np.sqrt(2.0)
_H_MAT = np.array([[_SQRT_HALF, _SQRT_HALF], [_SQRT_HALF, -_SQRT_HALF]], dtype=complex)

ROTATION_KINDS = ("RX", "RY", "RZ")
GATE_KINDS = ("H", "RX", "RY", "RZ", "CNOT", "ZZ")


def index_to_bitstring(index: int, num_qubits: int) -> str:
    """Render a basis index as a bitstring with qubit 0 leftmost."""
    return "".join("1" if (index >> q) & 1 else "0" for q in range(num_qubits))


def bitstring_to_index(bits: str) -> int:
    """Inverse of :func:`index_to_bitstring`."""
    return sum(1 << q for q, b in enumerate(bits) if b == "1")


@dataclass
class StateVector:
    """Complex amplitudes over the 2^n computational basis states."""

    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        expected = 1 << self.num_qubits
        if self.amplitudes.shape != (expected,):
            raise ValueError(
                f"amplitude array has shape {self.amplitudes.shape}, expected ({expected},)"
            )

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def copy(self) -> "StateVector":
        return StateVector(self.num_qubits, self.amplitudes.copy())


@dataclass(frozen=True)
class Gate:
    """A single gate: kind, target qubit(s), and angle where applicable."""

    kind: str
    qubits: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        want = 2 if self.kind in ("CNOT", "ZZ") else 1
        if len(self.qubits) != want:
            raise ValueError(f"{self.kind} acts on {want} qubit(s), got {self.qubits}")
        if want == 2 and self.qubits[0] == self.qubits[1]:
            raise ValueError(f"{self.kind} qubits must be distinct")
        needs_angle = self.kind in ROTATION_KINDS or self.kind == "ZZ"
        if needs_angle and self.angle is None:
            raise ValueError(f"{self.kind} requires an angle")
        if not needs_angle and self.angle is not None:
            raise ValueError(f"{self.kind} takes no angle")

    def inverse(self) -> "Gate":
        if self.angle is None:
            return self  # H and CNOT are self-inverse
        return Gate(self.kind, self.qubits, -self.angle)


@dataclass
class Circuit:
    """Ordered gate list with a map from parameter slots to the gates they drive.

    ``param_slots[k]`` lists ``(gate_position, coefficient)`` pairs: the gate's
    angle is ``coefficient * theta_k``, so one slot may drive many gates
    (layer-shared parameters).
    """

    num_qubits: int
    gates: list[Gate]
    param_slots: dict[int, list[tuple[int, float]]] = field(default_factory=dict)

    def validate_slots(self):
        """Raise ConfigError when the slot map references bad gates."""
        for slot, entries in self.param_slots.items():
            for pos, _coeff in entries:
                if not 0 <= pos < len(self.gates):
                    raise ConfigError(f"slot {slot} references gate position {pos}")
                gate = self.gates[pos]
                if gate.angle is None:
                    raise ConfigError(
                        f"slot {slot} references non-parameterized {gate.kind} at {pos}"
                    )

    @property
    def num_params(self) -> int:
        return 1 + max(self.param_slots) if self.param_slots else 0


def _check_capacity(n: int):
    if not 1 <= n <= MAX_QUBITS:
        raise CapacityError(f"qubit count {n} outside [1, {MAX_QUBITS}]")


def init_plus_state(n: int) -> StateVector:
    """Equal superposition |+>^n."""
    _check_capacity(n)
    amps = np.full(1 << n, 2.0 ** (-n / 2.0), dtype=complex)
    return StateVector(n, amps)


def init_zero_state(n: int) -> StateVector:
    """Computational basis state |0...0>."""
    _check_capacity(n)
    amps = np.zeros(1 << n, dtype=complex)
    amps[0] = 1.0
    return StateVector(n, amps)


def rotation_matrix(kind: str, angle: float) -> np.ndarray:
    """2x2 unitary exp(-i*angle/2*P) for P in {X, Y, Z}."""
    c = np.cos(angle / 2.0)
    s = np.sin(angle / 2.0)
    if kind == "RX":
        return np.array([[c, -1j * s], [-1j * s, c]])
    if kind == "RY":
        return np.array([[c, -s], [s, c]])
    if kind == "RZ":
        return np.array([[c - 1j * s, 0.0], [0.0, c + 1j * s]])
    raise ValueError(f"not a rotation kind: {kind}")


def apply_1q_matrix(amps: np.ndarray, mat: np.ndarray, qubit: int) -> np.ndarray:
    """Apply a 2x2 matrix to one qubit of a (..., 2^n) amplitude array."""
    shape = amps.shape
    inner = 1 << qubit
    view = amps.reshape(-1, 2, inner)
    out = np.matmul(mat, view)
    return out.reshape(shape)


def _apply_cnot(amps: np.ndarray, control: int, target: int) -> np.ndarray:
    hi, lo = max(control, target), min(control, target)
    mid = 1 << (hi - lo - 1)
    view = amps.reshape(-1, 2, mid, 2, 1 << lo)
    if control == hi:
        a = view[:, 1, :, 0, :].copy()
        view[:, 1, :, 0, :] = view[:, 1, :, 1, :]
        view[:, 1, :, 1, :] = a
    else:
        a = view[:, 0, :, 1, :].copy()
        view[:, 0, :, 1, :] = view[:, 1, :, 1, :]
        view[:, 1, :, 1, :] = a
    return amps


def _apply_rz(amps: np.ndarray, angle: float, qubit: int) -> np.ndarray:
    view = amps.reshape(-1, 2, 1 << qubit)
    view[:, 0, :] *= np.exp(-0.5j * angle)
    view[:, 1, :] *= np.exp(0.5j * angle)
    return amps


def _apply_zz_phase(amps: np.ndarray, angle: float, i: int, j: int) -> np.ndarray:
    hi, lo = max(i, j), min(i, j)
    mid = 1 << (hi - lo - 1)
    view = amps.reshape(-1, 2, mid, 2, 1 << lo)
    aligned = np.exp(-1j * angle)
    anti = np.exp(1j * angle)
    view[:, 0, :, 0, :] *= aligned
    view[:, 1, :, 1, :] *= aligned
    view[:, 0, :, 1, :] *= anti
    view[:, 1, :, 0, :] *= anti
    return amps


def apply_gate_array(amps: np.ndarray, gate: Gate, num_qubits: int) -> np.ndarray:
    """Apply one gate to a (..., 2^n) amplitude array, in place where possible."""
    for q in gate.qubits:
        if not 0 <= q < num_qubits:
            raise IndexError(f"qubit {q} out of range for {num_qubits}-qubit state")
    kind = gate.kind
    if kind == "H":
        return apply_1q_matrix(amps, _H_MAT, gate.qubits[0])
    if kind == "RZ":
        return _apply_rz(amps, gate.angle, gate.qubits[0])
    if kind in ("RX", "RY"):
        return apply_1q_matrix(amps, rotation_matrix(kind, gate.angle), gate.qubits[0])
    if kind == "CNOT":
        return _apply_cnot(amps, gate.qubits[0], gate.qubits[1])
    if kind == "ZZ":
        return _apply_zz_phase(amps, gate.angle, gate.qubits[0], gate.qubits[1])
    raise ValueError(f"unknown gate kind {kind!r}")


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    """Apply one gate to the state (mutating it) and return the state."""
    state.amplitudes = apply_gate_array(state.amplitudes, gate, state.num_qubits)
    return state


def run_circuit(circuit: Circuit, init: StateVector) -> StateVector:
    """Apply every gate of the circuit to a copy of the initial state."""
    if circuit.num_qubits != init.num_qubits:
        raise ValueError("circuit and state disagree on qubit count")
    state = init.copy()
    for gate in circuit.gates:
        apply_gate(state, gate)
    return state


def z_signs(num_qubits: int, qubit: int) -> np.ndarray:
    """Vector of Z_q eigenvalues (+1/-1) over all basis indices."""
    if not 0 <= qubit < num_qubits:
        raise IndexError(f"qubit {qubit} out of range")
    idx = np.arange(1 << num_qubits)
    return 1.0 - 2.0 * ((idx >> qubit) & 1)


def observable_diagonal(num_qubits: int, terms) -> np.ndarray:
    """Diagonal of a Z-basis observable.

    ``terms`` is a list mixing two-body entries ``(i, j, weight)`` and
    one-body entries ``(qubit, weight)``.
    """
    diag = np.zeros(1 << num_qubits)
    for term in terms:
        if len(term) == 3:
            i, j, w = term
            diag += w * z_signs(num_qubits, i) * z_signs(num_qubits, j)
        elif len(term) == 2:
            q, w = term
            diag += w * z_signs(num_qubits, q)
        else:
            raise ValueError(f"observable term must have 2 or 3 entries, got {term}")
    return diag


def expectation_zz(state: StateVector, couplings) -> float:
    """<state| sum_ij w_ij Z_i Z_j |state>."""
    diag = observable_diagonal(state.num_qubits, [(i, j, w) for i, j, w in couplings])
    return float(diag @ state.probabilities())


def expectation_z(state: StateVector, qubit: int) -> float:
    """<Z_qubit> of the state."""
    return float(z_signs(state.num_qubits, qubit) @ state.probabilities())


def sample_bitstrings(state: StateVector, shots: int, rng: np.random.Generator) -> list[str]:
    """Draw ``shots`` bitstrings from the Born distribution |amplitude|^2."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    probs = state.probabilities()
    probs = probs / probs.sum()  # absorb float drift so choice() accepts it
    indices = rng.choice(probs.size, size=shots, p=probs)
    n = state.num_qubits
    return [index_to_bitstring(int(z), n) for z in indices]


def _apply_generator(amps: np.ndarray, gate: Gate, num_qubits: int) -> np.ndarray:
    """Return (generator Pauli) @ amps for a parameterized gate, as a new array."""
    kind = gate.kind
    if kind in ("RX", "RY"):
        pauli = np.array([[0, 1], [1, 0]], dtype=complex) if kind == "RX" else np.array(
            [[0, -1j], [1j, 0]], dtype=complex
        )
        return apply_1q_matrix(amps, pauli, gate.qubits[0])
    if kind == "RZ":
        return amps * z_signs(num_qubits, gate.qubits[0])
    if kind == "ZZ":
        i, j = gate.qubits
        return amps * (z_signs(num_qubits, i) * z_signs(num_qubits, j))
    raise ConfigError(f"gate kind {kind} is not differentiable")


# d<O>/d(angle) = factor * Im(<b|G|a>); rotations carry the 1/2 from exp(-i a/2 P),
# ZZ = exp(-i a Z Z) does not, hence the factor 2.
_GENERATOR_FACTOR = {"RX": 1.0, "RY": 1.0, "RZ": 1.0, "ZZ": 2.0}


def adjoint_gradient(circuit: Circuit, init: StateVector, observable) -> np.ndarray:
    """Exact gradient of <observable> after the circuit, per parameter slot.

    One forward pass plus one reverse sweep; gradients of gates sharing a
    slot are accumulated with their linear coefficients.
    """
    circuit.validate_slots()
    num_params = circuit.num_params
    grads = np.zeros(num_params)
    if num_params == 0:
        return grads

    gate_to_slots: dict[int, list[tuple[int, float]]] = {}
    for slot, entries in circuit.param_slots.items():
        for pos, coeff in entries:
            gate_to_slots.setdefault(pos, []).append((slot, coeff))

    final = run_circuit(circuit, init)
    n = circuit.num_qubits
    diag = observable_diagonal(n, observable)
    lam = diag * final.amplitudes  # O|psi>
    phi = final.amplitudes

    for pos in range(len(circuit.gates) - 1, -1, -1):
        gate = circuit.gates[pos]
        if pos in gate_to_slots:
            gen_phi = _apply_generator(phi, gate, n)
            d = _GENERATOR_FACTOR[gate.kind] * float(np.imag(np.vdot(lam, gen_phi)))
            for slot, coeff in gate_to_slots[pos]:
                grads[slot] += coeff * d
        if pos > 0:
            inv = gate.inverse()
            phi = apply_gate_array(phi, inv, n)
            lam = apply_gate_array(lam, inv, n)
    return grads
