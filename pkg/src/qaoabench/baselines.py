"""Classical first-order optimizers driving QAOA via parameter-shift gradients.

All runs start from theta = 0 like the learned optimizers, so trajectories
share a common starting cost.  Every update leaves theta unchanged under a
zero gradient (Adam included, by symmetry of zero moments); since gamma =
beta = 0 is a stationary point of the exact QAOA landscape, exact-gradient
runs from the origin stay there.  That flat behavior is the honest baseline
under the default noise-free execution mode.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import minimize

from .exceptions import DivergenceError
from .problems import IsingInstance
from .qaoa import QaoaParams, qaoa_cost, qaoa_gradient_paramshift
from .trajectory import Trajectory


def record_point(traj: Trajectory, instance: IsingInstance, theta: np.ndarray) -> float:
    """Evaluate and append one trajectory point.

    A zero-coupling instance has cost identically zero; its normalized cost
    is recorded as 0 so runs stay well defined (rejecting such degenerate
    instances is the benchmark layer's job).
    """
    cost = qaoa_cost(instance, QaoaParams.from_flat(theta))
    norm = instance.normalizer
    traj.append(theta, cost, cost / norm if norm > 0 else 0.0)
    return cost

GRADIENT_OPTIMIZERS = ("sgd", "adam", "rmsprop", "adagrad")

DEFAULT_HYPERS = {
    "sgd": {"lr": 0.05},
    "adam": {"lr": 0.01, "beta1": 0.9, "beta2": 0.999, "eps": 1e-8},
    "rmsprop": {"lr": 0.01, "rho": 0.9, "eps": 1e-8},
    "adagrad": {"lr": 0.01, "eps": 1e-8},
}


@dataclass
class OptimizerState:
    """Per-run state: moment accumulators and hyperparameters for one kind."""

    kind: str
    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    rho: float = 0.9
    eps: float = 1e-8
    step_count: int = 0
    m: np.ndarray | None = None  # first moment (adam)
    v: np.ndarray | None = None  # second moment / squared accumulator


def make_optimizer(kind: str, hyper: dict | None = None) -> OptimizerState:
    if kind not in GRADIENT_OPTIMIZERS:
        raise ValueError(f"unknown optimizer kind {kind!r}")
    merged = dict(DEFAULT_HYPERS[kind])
    merged.update(hyper or {})
    return OptimizerState(kind=kind, **merged)


def step(state: OptimizerState, theta: np.ndarray, grad: np.ndarray):
    """One textbook update; returns (new_state, new_theta)."""
    theta = np.asarray(theta, dtype=float)
    grad = np.asarray(grad, dtype=float)
    if theta.shape != grad.shape:
        raise ValueError("theta and gradient shapes differ")
    if not np.isfinite(grad).all():
        raise DivergenceError(
            f"{state.kind} received a non-finite gradient at step {state.step_count}"
        )
    t = state.step_count + 1
    kind = state.kind
    if kind == "sgd":
        return replace(state, step_count=t), theta - state.lr * grad
    if kind == "adam":
        m = np.zeros_like(theta) if state.m is None else state.m
        v = np.zeros_like(theta) if state.v is None else state.v
        m = state.beta1 * m + (1 - state.beta1) * grad
        v = state.beta2 * v + (1 - state.beta2) * grad * grad
        m_hat = m / (1 - state.beta1**t)
        v_hat = v / (1 - state.beta2**t)
        new_theta = theta - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
        return replace(state, step_count=t, m=m, v=v), new_theta
    if kind == "rmsprop":
        v = np.zeros_like(theta) if state.v is None else state.v
        v = state.rho * v + (1 - state.rho) * grad * grad
        new_theta = theta - state.lr * grad / (np.sqrt(v) + state.eps)
        return replace(state, step_count=t, v=v), new_theta
    if kind == "adagrad":
        v = np.zeros_like(theta) if state.v is None else state.v
        v = v + grad * grad
        new_theta = theta - state.lr * grad / (np.sqrt(v) + state.eps)
        return replace(state, step_count=t, v=v), new_theta
    raise ValueError(f"unknown optimizer kind {kind!r}")


def run_optimizer(
    instance: IsingInstance,
    kind: str,
    hyper: dict | None = None,
    T: int = 50,
    seed: int = 0,
    p: int = 1,
) -> Trajectory:
    """Unroll a gradient optimizer for T steps from theta = 0.

    ``seed`` is part of the determinism contract; the exact-gradient path is
    deterministic regardless.
    """
    del seed  # reserved for stochastic execution modes
    state = make_optimizer(kind, hyper)
    theta = np.zeros(2 * p)
    traj = Trajectory()
    for _t in range(T):
        record_point(traj, instance, theta)
        grad = qaoa_gradient_paramshift(instance, QaoaParams.from_flat(theta))
        state, theta = step(state, theta, grad)
        if not np.isfinite(theta).all():
            raise DivergenceError(f"{kind} produced non-finite parameters")
    record_point(traj, instance, theta)
    return traj


def nelder_mead(instance: IsingInstance, budget: int, p: int = 1) -> Trajectory:
    """Simplex search over R^{2p}; every cost evaluation counts against budget.

    The initial simplex is theta = 0 plus 0.3-radian steps along each axis,
    which is deterministic and large enough to step off the origin's
    stationary plateau.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    dim = 2 * p
    traj = Trajectory()

    def objective(theta):
        if len(traj) >= budget:
            return float(traj.costs[-1])  # budget exhausted; freeze
        return record_point(traj, instance, theta)

    simplex = np.zeros((dim + 1, dim))
    for k in range(dim):
        simplex[k + 1, k] = 0.3
    minimize(
        objective,
        np.zeros(dim),
        method="Nelder-Mead",
        options={"initial_simplex": simplex, "maxfev": budget, "xatol": 1e-10, "fatol": 1e-12},
    )
    traj.thetas = traj.thetas[:budget]
    traj.costs = traj.costs[:budget]
    traj.normalized_costs = traj.normalized_costs[:budget]
    return traj
