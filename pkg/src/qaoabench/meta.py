"""Meta-training of the recurrent optimizers: episode unrolling, the
observed-improvement meta-loss, backpropagation through time, and transfer
evaluation on larger instances.

An episode starts at theta = 0 and alternates cost evaluation with a cell
step for T iterations.  The meta-loss sums min(0, y_t - y_t^best) over the
normalized costs, so only steps that improve on the running best contribute;
the running best is treated as a constant during differentiation.  BPTT
flows through the cells and through the cost evaluations (exact adjoint
gradients supply d cost / d theta); the flat weight vector is updated with
the same adaptive-moment rule the classical baselines use.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .baselines import make_optimizer, record_point, step
from .cells import CellState, LstmWeights, QlstmWeights, propose_params
from .exceptions import DivergenceError
from .problems import (
    KIND_MAXCUT,
    KIND_SK,
    IsingInstance,
    brute_force_optimum,
    approx_ratio,
    generate_instance,
)
from .qaoa import QaoaParams, qaoa_gradient_adjoint
from .seeding import derive_seed
from .trajectory import Trajectory

DEFAULT_EVAL_T = 50
DEFAULT_REPORT_ITER = 3


@dataclass
class MetaConfig:
    """Hyperparameters of one meta-training run."""

    p: int = 1
    unroll_steps: int = 5          # T
    meta_iters: int = 200          # K_meta
    batch_size: int = 4
    meta_lr: float = 0.01
    train_nodes: int = 7           # N1
    seed: int = 0
    family: str = KIND_MAXCUT
    p_edge: float = 3.0 / 7.0
    sk_dist: str = "pm1"
    optimizer_kind: str = "qlstm"  # or "lstm"
    vqc_layers: int = 2
    pool_size: int | None = None   # draw batches from a fixed pool when set

    def __post_init__(self):
        if self.unroll_steps < 2:
            raise ValueError("unroll horizon must be >= 2")
        if self.meta_iters < 0 or self.batch_size < 1 or self.train_nodes < 2:
            raise ValueError("counts must be positive")
        if self.family not in (KIND_MAXCUT, KIND_SK):
            raise ValueError(f"unknown family {self.family!r}")
        if self.optimizer_kind not in ("qlstm", "lstm"):
            raise ValueError(f"unknown optimizer kind {self.optimizer_kind!r}")

    def train_instance(self, index: int) -> IsingInstance:
        seed = derive_seed(self.seed, "train", self.family, self.train_nodes, index)
        return generate_instance(
            self.family, self.train_nodes, seed, p_edge=self.p_edge, sk_dist=self.sk_dist
        )


def init_weights(config: MetaConfig):
    if config.optimizer_kind == "qlstm":
        return QlstmWeights.init(config.p, config.seed, vqc_layers=config.vqc_layers)
    return LstmWeights.init(config.p, config.seed)


def _episode_inputs(theta: np.ndarray, normalized_cost: float) -> np.ndarray:
    return np.concatenate([theta, [normalized_cost]])


def unroll_episode(weights, instance: IsingInstance, T: int, with_tape: bool = False):
    """Run T optimizer steps from theta = 0; records T+1 trajectory points."""
    dim = weights.hidden_size
    theta = np.zeros(dim)
    state = CellState.zeros(dim)
    traj = Trajectory()
    tape = []
    for _t in range(T):
        cost = record_point(traj, instance, theta)
        x = _episode_inputs(theta, traj.normalized_costs[-1])
        state, y_out, cache = weights.cell_forward(state, x)
        new_theta = propose_params(theta, y_out, weights.alpha)
        if with_tape:
            tape.append({"cache": cache, "y_out": y_out, "theta": theta})
        theta = new_theta
    record_point(traj, instance, theta)
    if with_tape:
        return traj, tape
    return traj


def running_best(normalized_costs) -> np.ndarray:
    """y_t^best = min over j < t; entry 0 is the start cost itself."""
    ny = np.asarray(normalized_costs, dtype=float)
    best = np.empty_like(ny)
    best[0] = ny[0]
    np.minimum.accumulate(ny[:-1], out=best[1:])
    return best


def meta_loss(traj: Trajectory, best_values: np.ndarray | None = None) -> float:
    """Sum of min(0, y_t - y_t^best) for t = 1..T; non-positive, lower is better."""
    ny = np.asarray(traj.normalized_costs, dtype=float)
    best = running_best(ny) if best_values is None else np.asarray(best_values, dtype=float)
    return float(np.minimum(0.0, ny[1:] - best[1:]).sum())


def improvement_indicators(normalized_costs, best_values=None) -> np.ndarray:
    """Direct d(loss)/d(y_t): 1 where the step strictly improves the running
    best, else 0 (the subgradient at the kink); entry 0 is always 0."""
    ny = np.asarray(normalized_costs, dtype=float)
    best = running_best(ny) if best_values is None else np.asarray(best_values, dtype=float)
    ind = (ny < best).astype(float)
    ind[0] = 0.0
    return ind


def episode_gradient(weights, instance: IsingInstance, T: int, best_values=None):
    """Loss and its gradient w.r.t. the flat weight vector, via BPTT.

    ``best_values`` overrides the running-best bookkeeping (no gradient flows
    through it, so perturbations that flip no indicator leave the gradient
    unchanged).
    """
    traj, tape = unroll_episode(weights, instance, T, with_tape=True)
    ind = improvement_indicators(traj.normalized_costs, best_values)
    loss = meta_loss(traj, best_values)
    norm = instance.normalizer
    dim = weights.hidden_size

    def cost_grad(theta):
        return qaoa_gradient_adjoint(instance, QaoaParams.from_flat(theta))

    cell_grad = np.zeros(weights.num_cell_params())
    grad_alpha = np.zeros(dim)
    # gradient w.r.t. theta_T enters only through its cost term
    grad_theta = ind[T] / norm * cost_grad(traj.thetas[T]) if ind[T] else np.zeros(dim)
    grad_h = np.zeros(dim)
    grad_c = np.zeros(dim)

    for t in range(T - 1, -1, -1):
        entry = tape[t]
        # theta_{t+1} = theta_t + alpha * y_t
        grad_y = grad_theta * weights.alpha
        grad_alpha += grad_theta * entry["y_out"]
        cg, grad_h, grad_c, grad_x = weights.cell_backward(entry["cache"], grad_h, grad_c, grad_y)
        cell_grad += cg
        grad_theta = grad_theta + grad_x[:dim]
        grad_ny = grad_x[dim]
        if t >= 1:
            grad_ny += ind[t]
            if grad_ny != 0.0:
                grad_theta = grad_theta + (grad_ny / norm) * cost_grad(entry["theta"])
        # at t = 0 theta is the constant origin: remaining gradient is dropped
    # alpha is trained in log space to stay positive
    grad_vec = np.concatenate([cell_grad, grad_alpha * weights.alpha])
    return loss, grad_vec, traj


def meta_train(
    config: MetaConfig,
    pool: list[IsingInstance] | None = None,
    init=None,
    resume: dict | None = None,
    on_iteration=None,
):
    """Train QLSTM or LSTM weights by BPTT over sampled episodes.

    Returns (weights, log) where log rows are (meta_iter, mean_meta_loss,
    wallclock_s).  ``pool`` restricts sampling to a fixed instance set;
    otherwise fresh instances are generated per iteration.  ``resume``
    carries {meta_iter, adam_state} from a checkpoint.
    """
    weights = init if init is not None else init_weights(config)
    if pool is None and config.pool_size:
        pool = [config.train_instance(k) for k in range(config.pool_size)]

    vector = weights.to_vector()
    opt_state = make_optimizer("adam", {"lr": config.meta_lr})
    start_iter = 0
    if resume:
        start_iter = int(resume.get("meta_iter") or 0)
        adam = resume.get("adam_state")
        if adam:
            opt_state.m = np.asarray(adam["m"], dtype=float)
            opt_state.v = np.asarray(adam["v"], dtype=float)
            opt_state.step_count = int(adam["t"])

    log = []
    t_start = time.perf_counter()
    for k in range(start_iter, start_iter + config.meta_iters):
        if pool is not None:
            rng = np.random.default_rng(derive_seed(config.seed, "batch", k))
            batch = [pool[int(i)] for i in rng.integers(len(pool), size=config.batch_size)]
        else:
            batch = [
                config.train_instance(k * config.batch_size + b)
                for b in range(config.batch_size)
            ]
        losses = []
        grad = np.zeros_like(vector)
        for inst in batch:
            loss, g, _traj = episode_gradient(weights, inst, config.unroll_steps)
            losses.append(loss)
            grad += g
        grad /= len(batch)
        mean_loss = float(np.mean(losses))
        if not np.isfinite(mean_loss) or not np.isfinite(grad).all():
            raise DivergenceError(f"meta-loss diverged at iteration {k}: {mean_loss}")
        opt_state, vector = step(opt_state, vector, grad)
        weights = weights.with_vector(vector)
        log.append((k, mean_loss, time.perf_counter() - t_start))
        if on_iteration is not None:
            on_iteration(
                k,
                weights,
                mean_loss,
                {"m": opt_state.m, "v": opt_state.v, "t": opt_state.step_count},
            )
    return weights, log


def evaluate_transfer(
    weights,
    sizes,
    instances_per_size: int,
    eval_T: int = DEFAULT_EVAL_T,
    report_iter: int = DEFAULT_REPORT_ITER,
    family: str = KIND_MAXCUT,
    p_edge: float = 3.0 / 7.0,
    sk_dist: str = "pm1",
    master_seed: int = 0,
    namespace: str = "eval",
):
    """Frozen-weight evaluation on larger instances.

    Returns {size: {"mean", "std", "count", "ratios"}} of approximation
    ratios at ``report_iter`` plus the trajectories for inspection.
    """
    if report_iter > eval_T:
        raise ValueError("report_iter cannot exceed the evaluation horizon")
    table = {}
    trajectories = {}
    for n in sizes:
        ratios = []
        for idx in range(instances_per_size):
            seed = derive_seed(master_seed, namespace, family, n, idx)
            inst = generate_instance(family, n, seed, p_edge=p_edge, sk_dist=sk_dist)
            oracle = brute_force_optimum(inst)
            traj = unroll_episode(weights, inst, eval_T)
            ratios.append(approx_ratio(traj.costs[report_iter], inst, oracle))
            trajectories[(n, idx)] = traj
        table[n] = {
            "mean": float(np.mean(ratios)),
            "std": float(np.std(ratios)),
            "count": len(ratios),
            "ratios": ratios,
        }
    return table, trajectories
