"""Depth-p QAOA ansatz for Ising instances: state preparation, cost, gradients.

The flattened parameter vector is [gamma_1..gamma_p, beta_1..beta_p].  The
cost layer exp(-i*gamma*H_C) is applied as one diagonal phase per layer
(all ZZ factors commute); the mixer applies RX(2*beta) to every qubit, so
exp(-i*beta*X) per qubit.  The optimized cost excludes the instance offset.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .problems import IsingInstance
from .simulator import (
    Circuit,
    Gate,
    StateVector,
    adjoint_gradient,
    apply_1q_matrix,
    init_plus_state,
    rotation_matrix,
    z_signs,
)

# paramshift memory guard: chunk batched shifted evaluations
_MAX_BATCH_ELEMENTS = 1 << 23


@dataclass
class QaoaParams:
    """Variational angles gamma, beta (radians), one pair per layer."""

    gamma: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        self.gamma = np.asarray(self.gamma, dtype=float)
        self.beta = np.asarray(self.beta, dtype=float)
        if self.gamma.shape != self.beta.shape or self.gamma.ndim != 1:
            raise ValueError("gamma and beta must be 1-D vectors of equal length")
        if not (np.isfinite(self.gamma).all() and np.isfinite(self.beta).all()):
            raise ValueError("parameters must be finite")

    @property
    def p(self) -> int:
        return self.gamma.size

    def flatten(self) -> np.ndarray:
        return np.concatenate([self.gamma, self.beta])

    @classmethod
    def from_flat(cls, theta: np.ndarray) -> "QaoaParams":
        theta = np.asarray(theta, dtype=float)
        if theta.size % 2:
            raise ValueError("flattened parameter vector must have even length")
        p = theta.size // 2
        return cls(theta[:p].copy(), theta[p:].copy())

    @classmethod
    def zeros(cls, p: int) -> "QaoaParams":
        return cls(np.zeros(p), np.zeros(p))


def _apply_mixer_layer(amps: np.ndarray, num_qubits: int, beta: float) -> np.ndarray:
    mat = rotation_matrix("RX", 2.0 * beta)
    for q in range(num_qubits):
        amps = apply_1q_matrix(amps, mat, q)
    return amps


def build_qaoa_state(instance: IsingInstance, params: QaoaParams) -> StateVector:
    """|+>^N followed by alternating cost-phase and mixer layers."""
    n = instance.num_spins
    state = init_plus_state(n)
    energy = instance.energy_diagonal()
    amps = state.amplitudes
    for layer in range(params.p):
        amps = amps * np.exp(-1j * params.gamma[layer] * energy)
        amps = _apply_mixer_layer(amps, n, params.beta[layer])
    state.amplitudes = amps
    return state


def qaoa_cost(instance: IsingInstance, params: QaoaParams) -> float:
    """<H_C> of the ansatz state (offset excluded)."""
    state = build_qaoa_state(instance, params)
    return float(instance.energy_diagonal() @ state.probabilities())


def qaoa_cost_sampled(
    instance: IsingInstance, params: QaoaParams, shots: int, rng: np.random.Generator
) -> float:
    """Unbiased shot estimate: mean Ising energy of sampled bitstrings."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    state = build_qaoa_state(instance, params)
    probs = state.probabilities()
    indices = rng.choice(probs.size, size=shots, p=probs / probs.sum())
    return float(instance.energy_diagonal()[indices].mean())


def qaoa_circuit(instance: IsingInstance, params: QaoaParams) -> Circuit:
    """Gate-level circuit with layer-shared parameter slots.

    Slot k < p is gamma_{k+1} (each ZZ carries coefficient J_ij); slot p + k
    is beta_{k+1} (each RX carries coefficient 2).
    """
    n = instance.num_spins
    p = params.p
    gates: list[Gate] = []
    slots: dict[int, list[tuple[int, float]]] = {k: [] for k in range(2 * p)}
    for layer in range(p):
        for i, j, w in instance.couplings:
            slots[layer].append((len(gates), w))
            gates.append(Gate("ZZ", (i, j), params.gamma[layer] * w))
        for q in range(n):
            slots[p + layer].append((len(gates), 2.0))
            gates.append(Gate("RX", (q,), 2.0 * params.beta[layer]))
    return Circuit(n, gates, slots)


def qaoa_gradient_adjoint(instance: IsingInstance, params: QaoaParams) -> np.ndarray:
    """Exact gradient of qaoa_cost via one reverse sweep."""
    circuit = qaoa_circuit(instance, params)
    return adjoint_gradient(circuit, init_plus_state(instance.num_spins), instance.couplings)


def _batched_expectations(batch: np.ndarray, energy: np.ndarray) -> np.ndarray:
    return (np.abs(batch) ** 2) @ energy


def qaoa_gradient_paramshift(instance: IsingInstance, params: QaoaParams) -> np.ndarray:
    """Exact gradient via per-gate shifted circuit evaluations.

    Each ZZ gate exp(-i*theta*ZZ) is evaluated with theta shifted by +-pi/4
    (the +-pi/2 shift of its half-angle parameterization) and each RX gate
    with its angle shifted by +-pi/2; half-differences are chained through
    the local coefficients (J_ij for gamma, 2 for beta).  Shifted gates
    commute with the rest of their layer, so evaluations reuse per-layer
    prefix states; suffix layers are applied to batches of shifted states.
    """
    n = instance.num_spins
    p = params.p
    energy = instance.energy_diagonal()
    couplings = instance.couplings
    grads = np.zeros(2 * p)

    # prefix[l]: state after l full layers
    prefix = [init_plus_state(n).amplitudes]
    for layer in range(p):
        amps = prefix[-1] * np.exp(-1j * params.gamma[layer] * energy)
        amps = _apply_mixer_layer(amps, n, params.beta[layer])
        prefix.append(amps)

    def suffix_cost(batch: np.ndarray, start_layer: int, skip_cost_phase: bool) -> np.ndarray:
        for layer in range(start_layer, p):
            if not (skip_cost_phase and layer == start_layer):
                batch = batch * np.exp(-1j * params.gamma[layer] * energy)
            batch = _apply_mixer_layer(batch, n, params.beta[layer])
        return _batched_expectations(batch, energy)

    max_rows = max(1, _MAX_BATCH_ELEMENTS // (1 << n))

    for layer in range(p):
        if couplings:
            after_cost = prefix[layer] * np.exp(-1j * params.gamma[layer] * energy)
            # gamma: one +/- pair per ZZ gate, shifted by the extra phase
            # exp(-i*(+-pi/4)*s_i*s_j) inserted inside the commuting cost layer
            pair_rows = []
            for i, j, _w in couplings:
                signs = z_signs(n, i) * z_signs(n, j)
                pair_rows.append(np.exp(-1j * (np.pi / 4) * signs))
                pair_rows.append(np.exp(1j * (np.pi / 4) * signs))
            values = np.empty(len(pair_rows))
            for start in range(0, len(pair_rows), max_rows):
                block = np.stack(pair_rows[start : start + max_rows]) * after_cost
                values[start : start + block.shape[0]] = suffix_cost(
                    block, layer, skip_cost_phase=True
                )
            for c, (_i, _j, w) in enumerate(couplings):
                # d<H>/d(theta_gate) = C(+pi/4) - C(-pi/4); chain dtheta/dgamma = J
                grads[layer] += w * (values[2 * c] - values[2 * c + 1])

        # beta: one +/- pair per RX gate; RX gates on distinct qubits commute,
        # so the shift is an extra RX(+-pi/2) applied after the full mixer layer
        plus = rotation_matrix("RX", np.pi / 2)
        minus = rotation_matrix("RX", -np.pi / 2)
        rows = []
        for q in range(n):
            rows.append(apply_1q_matrix(prefix[layer + 1].copy(), plus, q))
            rows.append(apply_1q_matrix(prefix[layer + 1].copy(), minus, q))
        values = np.empty(len(rows))
        for start in range(0, len(rows), max_rows):
            block = np.stack(rows[start : start + max_rows])
            values[start : start + block.shape[0]] = suffix_cost(
                block, layer + 1, skip_cost_phase=False
            )
        for q in range(n):
            # half-difference times the chain factor 2 from RX(2*beta)
            grads[p + layer] += values[2 * q] - values[2 * q + 1]
    return grads
