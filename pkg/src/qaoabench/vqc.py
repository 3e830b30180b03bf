"""Variational quantum circuit block: angle encoding, entangling layers, Z readout.

Inputs are squashed through arctan before the RY encoding so unbounded
values map to angles in (-pi/2, pi/2).  Each variational layer applies
RX, RY, RZ on every qubit followed by a CNOT ring q -> q+1 (mod n).
Differentiation is exact (adjoint), with respect to both the trainable
angles and the circuit inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .simulator import (
    Circuit,
    Gate,
    adjoint_gradient,
    expectation_z,
    init_zero_state,
    run_circuit,
)


@dataclass(frozen=True)
class VqcConfig:
    num_qubits: int
    num_layers: int
    output_size: int

    def __post_init__(self):
        if self.output_size < 1:
            raise ValueError("output_size must be >= 1")
        if self.num_qubits < self.output_size:
            raise ValueError("output_size cannot exceed num_qubits")
        if self.num_layers < 0:
            raise ValueError("num_layers must be >= 0")

    @property
    def num_angles(self) -> int:
        return self.num_layers * self.num_qubits * 3


@dataclass
class VqcParams:
    """Rotation angles, shape [num_layers, num_qubits, 3] for (RX, RY, RZ)."""

    angles: np.ndarray

    def __post_init__(self):
        self.angles = np.asarray(self.angles, dtype=float)
        if self.angles.ndim != 3 or self.angles.shape[2] != 3:
            raise ValueError(f"angles must have shape [L, n, 3], got {self.angles.shape}")
        if not np.isfinite(self.angles).all():
            raise ValueError("angles must be finite")

    @classmethod
    def init(cls, config: VqcConfig, rng: np.random.Generator, scale: float = 0.1) -> "VqcParams":
        shape = (config.num_layers, config.num_qubits, 3)
        return cls(rng.uniform(-scale, scale, size=shape))

    @classmethod
    def zeros(cls, config: VqcConfig) -> "VqcParams":
        return cls(np.zeros((config.num_layers, config.num_qubits, 3)))


_ROT_ORDER = ("RX", "RY", "RZ")


def vqc_circuit(config: VqcConfig, params: VqcParams, v: np.ndarray) -> Circuit:
    """Gate list with slots 0..n-1 for encoding angles, then one per rotation."""
    n = config.num_qubits
    gates: list[Gate] = []
    slots: dict[int, list[tuple[int, float]]] = {}
    for q in range(n):
        slots[q] = [(len(gates), 1.0)]
        gates.append(Gate("RY", (q,), float(np.arctan(v[q]))))
    slot = n
    for layer in range(config.num_layers):
        for q in range(n):
            for a, kind in enumerate(_ROT_ORDER):
                slots[slot] = [(len(gates), 1.0)]
                gates.append(Gate(kind, (q,), float(params.angles[layer, q, a])))
                slot += 1
        if n >= 2:
            for q in range(n):
                gates.append(Gate("CNOT", (q, (q + 1) % n)))
    return Circuit(n, gates, slots)


def _check_input(config: VqcConfig, v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (config.num_qubits,):
        raise ValueError(f"input has shape {v.shape}, expected ({config.num_qubits},)")
    return v


def vqc_forward(config: VqcConfig, params: VqcParams, v: np.ndarray) -> np.ndarray:
    """(<Z_0>, ..., <Z_{output_size-1}>) of the prepared state; entries in [-1, 1]."""
    v = _check_input(config, v)
    state = run_circuit(vqc_circuit(config, params, v), init_zero_state(config.num_qubits))
    return np.array([expectation_z(state, q) for q in range(config.output_size)])


def vqc_backward(
    config: VqcConfig, params: VqcParams, v: np.ndarray, upstream: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Vector-Jacobian product of vqc_forward.

    Returns (grad_params like angles, grad_inputs like v); the input gradient
    carries the arctan chain factor 1/(1 + v_i^2).
    """
    v = _check_input(config, v)
    upstream = np.asarray(upstream, dtype=float)
    if upstream.shape != (config.output_size,):
        raise ValueError(
            f"upstream has shape {upstream.shape}, expected ({config.output_size},)"
        )
    circuit = vqc_circuit(config, params, v)
    observable = [(q, float(upstream[q])) for q in range(config.output_size)]
    grads = adjoint_gradient(circuit, init_zero_state(config.num_qubits), observable)
    n = config.num_qubits
    grad_inputs = grads[:n] / (1.0 + v * v)
    grad_params = grads[n:].reshape(config.num_layers, n, 3)
    return grad_params, grad_inputs
