"""Benchmark grid execution: deterministic instances, optimizer runs, and
record/summary emission.

Every run is a pure function of (master_seed, config): instance seeds are
hash-derived from (master_seed, family, n, density, index), learned
optimizers run frozen checkpoints, and rows are sorted by (run_id, iter)
before writing, so reruns produce byte-identical CSVs.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict
from fractions import Fraction
from pathlib import Path

import numpy as np

from .baselines import GRADIENT_OPTIMIZERS, nelder_mead, run_optimizer
from .cells import load_weights
from .exceptions import ConfigError
from .meta import unroll_episode
from .problems import (
    KIND_MAXCUT,
    KIND_SK,
    approx_ratio,
    brute_force_optimum,
    generate_instance,
    save_instance,
)
from .seeding import derive_seed

LEARNED_OPTIMIZERS = ("qlstm", "lstm")
ALL_OPTIMIZERS = LEARNED_OPTIMIZERS + GRADIENT_OPTIMIZERS + ("nelder-mead",)

DEFAULT_P_EDGES = tuple(k / 7 for k in range(2, 7))
DEFAULT_SIZES = tuple(range(8, 17))

RECORD_COLUMNS = (
    "run_id", "optimizer", "family", "n", "p_edge",
    "instance_seed", "iter", "raw_cost", "normalized_cost", "approx_ratio",
)

# Recursive-QAOA reference ratios quoted from the literature; these are
# echoed into summaries with provenance metadata and never computed here.
RQAOA_REFERENCE_MAXCUT = {
    "2/7": (0.92, 0.04),
    "3/7": (0.90, 0.05),
    "4/7": (0.89, 0.07),
    "5/7": (0.87, 0.06),
    "6/7": (0.86, 0.07),
}
RQAOA_REFERENCE_SK = {
    8: 0.92, 9: 0.89, 10: 0.93, 11: 0.87, 12: 0.92,
    13: 0.86, 14: 0.92, 15: 0.83, 16: 0.84,
}

SCHEMA_VERSION = 1


def density_label(p_edge: float) -> str:
    frac = Fraction(p_edge).limit_denominator(64)
    return f"{frac.numerator}/{frac.denominator}"


@dataclass
class BenchConfig:
    family: str = KIND_MAXCUT
    p_edges: tuple = DEFAULT_P_EDGES          # Max-Cut densities
    sk_dist: str = "pm1"
    sizes: tuple = DEFAULT_SIZES
    instances_per_cell: int = 20
    p: int = 1
    eval_T: int = 50
    report_iter: int = 3
    optimizers: tuple = ("qlstm", "lstm", "rmsprop", "sgd", "adam", "adagrad")
    master_seed: int = 0
    checkpoints: dict = field(default_factory=dict)  # optimizer -> path
    out_dir: str = "bench_out"
    workers: int = 1

    def __post_init__(self):
        self.sizes = tuple(int(n) for n in self.sizes)
        self.p_edges = tuple(float(x) for x in self.p_edges)
        self.optimizers = tuple(self.optimizers)
        if self.family not in (KIND_MAXCUT, KIND_SK):
            raise ConfigError(f"unknown family {self.family!r}")
        if not self.sizes or not self.optimizers:
            raise ConfigError("sizes and optimizers must be non-empty")
        if any(n < 2 or n > 24 for n in self.sizes):
            raise ConfigError("sizes must lie in [2, 24] (simulator and oracle caps)")
        if self.family == KIND_MAXCUT and (
            not self.p_edges or any(pe <= 0.0 or pe > 1.0 for pe in self.p_edges)
        ):
            raise ConfigError("Max-Cut density list must be non-empty with 0 < p <= 1")
        for opt in self.optimizers:
            if opt not in ALL_OPTIMIZERS:
                raise ConfigError(f"unknown optimizer {opt!r}")
        if self.instances_per_cell < 1 or self.eval_T < 1 or self.p < 1:
            raise ConfigError("counts must be positive")
        if not 0 <= self.report_iter <= self.eval_T:
            raise ConfigError("report_iter must lie in [0, eval_T]")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")

    def densities(self) -> tuple:
        return self.p_edges if self.family == KIND_MAXCUT else (None,)

    def cells(self):
        for p_edge in self.densities():
            for n in self.sizes:
                yield p_edge, n

    def instance_seed(self, n: int, p_edge, idx: int) -> int:
        density = density_label(p_edge) if p_edge is not None else self.sk_dist
        return derive_seed(self.master_seed, self.family, n, density, idx)

    def make_instance(self, n: int, p_edge, idx: int):
        return generate_instance(
            self.family, n, self.instance_seed(n, p_edge, idx),
            p_edge=p_edge, sk_dist=self.sk_dist,
        )

    def to_dict(self) -> dict:
        data = asdict(self)
        data["p_edges"] = list(self.p_edges)
        data["sizes"] = list(self.sizes)
        data["optimizers"] = list(self.optimizers)
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "BenchConfig":
        known = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in data.items() if k in known})


@dataclass
class RunRecord:
    run_id: str
    optimizer: str
    family: str
    n: int
    p_edge: float | None
    instance_seed: int
    iter: int
    raw_cost: float
    normalized_cost: float
    approx_ratio: float


def run_id_for(family: str, p_edge, n: int, idx: int, optimizer: str) -> str:
    parts = [family]
    if p_edge is not None:
        parts.append(f"pe{p_edge:.6f}")
    parts += [f"n{n:02d}", f"i{idx:03d}", optimizer]
    return "-".join(parts)


def load_checkpointed_weights(config: BenchConfig) -> dict:
    """Load frozen weights for every learned optimizer in the run."""
    loaded = {}
    for opt in config.optimizers:
        if opt not in LEARNED_OPTIMIZERS:
            continue
        path = config.checkpoints.get(opt)
        if not path:
            raise ConfigError(f"optimizer {opt!r} requires a checkpoint path")
        if not Path(path).exists():
            raise ConfigError(f"checkpoint for {opt!r} not found: {path}")
        weights, _extras = load_weights(path)
        if weights.kind != opt:
            raise ConfigError(f"checkpoint {path} holds {weights.kind!r}, expected {opt!r}")
        if weights.p != config.p:
            raise ConfigError(
                f"checkpoint depth p={weights.p} does not match benchmark p={config.p}"
            )
        loaded[opt] = weights
    return loaded


def run_trajectory(instance, optimizer: str, config: BenchConfig, weights=None):
    if optimizer in LEARNED_OPTIMIZERS:
        return unroll_episode(weights, instance, config.eval_T)
    if optimizer == "nelder-mead":
        return nelder_mead(instance, budget=config.eval_T + 1, p=config.p)
    return run_optimizer(
        instance, optimizer, T=config.eval_T,
        seed=derive_seed(config.master_seed, "run", optimizer), p=config.p,
    )


def _instance_task(args):
    config, p_edge, n, idx, weights_by_opt = args
    instance = config.make_instance(n, p_edge, idx)
    oracle = brute_force_optimum(instance)
    records = []
    theta_rows = []
    for optimizer in config.optimizers:
        traj = run_trajectory(instance, optimizer, config, weights_by_opt.get(optimizer))
        run_id = run_id_for(config.family, p_edge, n, idx, optimizer)
        for it, (theta, cost, ncost) in enumerate(
            zip(traj.thetas, traj.costs, traj.normalized_costs)
        ):
            records.append(RunRecord(
                run_id=run_id, optimizer=optimizer, family=config.family, n=n,
                p_edge=p_edge, instance_seed=instance.seed, iter=it,
                raw_cost=cost, normalized_cost=ncost,
                approx_ratio=approx_ratio(cost, instance, oracle),
            ))
            theta_rows.append((run_id, it) + tuple(float(v) for v in theta))
    return records, theta_rows


def execute_bench(config: BenchConfig):
    """Run every (optimizer x instance) cell; returns (records, theta_rows)."""
    weights_by_opt = load_checkpointed_weights(config)
    tasks = [
        (config, p_edge, n, idx, weights_by_opt)
        for p_edge, n in config.cells()
        for idx in range(config.instances_per_cell)
    ]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_instance_task, tasks))
    else:
        results = [_instance_task(t) for t in tasks]
    records = [rec for recs, _ in results for rec in recs]
    theta_rows = [row for _, rows in results for row in rows]
    records.sort(key=lambda r: (r.run_id, r.iter))
    theta_rows.sort(key=lambda row: (row[0], row[1]))
    return records, theta_rows


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_records_csv(records, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RECORD_COLUMNS)
        for r in records:
            writer.writerow([_fmt(getattr(r, col)) for col in RECORD_COLUMNS])


def read_records_csv(path):
    records = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            records.append(RunRecord(
                run_id=row["run_id"], optimizer=row["optimizer"], family=row["family"],
                n=int(row["n"]), p_edge=float(row["p_edge"]) if row["p_edge"] else None,
                instance_seed=int(row["instance_seed"]), iter=int(row["iter"]),
                raw_cost=float(row["raw_cost"]),
                normalized_cost=float(row["normalized_cost"]),
                approx_ratio=float(row["approx_ratio"]),
            ))
    return records


def write_thetas_csv(theta_rows, path, p: int):
    header = ["run_id", "iter"]
    header += [f"gamma_{k + 1}" for k in range(p)] + [f"beta_{k + 1}" for k in range(p)]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in theta_rows:
            writer.writerow([_fmt(v) for v in row])


def read_thetas_csv(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [(r[0], int(r[1])) + tuple(float(v) for v in r[2:]) for r in reader]
    return header, rows


def cell_key(optimizer: str, n: int, p_edge) -> str:
    key = f"{optimizer}|n={n}"
    if p_edge is not None:
        key += f"|pe={density_label(p_edge)}"
    return key


def summarize(records, config: BenchConfig) -> dict:
    """Mean/std/count of the approximation ratio at report_iter per cell."""
    buckets: dict[str, list[float]] = {}
    meta: dict[str, tuple] = {}
    for r in records:
        if r.iter != config.report_iter:
            continue
        key = cell_key(r.optimizer, r.n, r.p_edge)
        buckets.setdefault(key, []).append(r.approx_ratio)
        meta[key] = (r.optimizer, r.n, r.p_edge)
    cells = {}
    for key in sorted(buckets):
        optimizer, n, p_edge = meta[key]
        vals = np.array(buckets[key])
        cells[key] = {
            "optimizer": optimizer,
            "n": n,
            "p_edge": p_edge,
            "mean": float(vals.mean()),
            "std": float(vals.std()),
            "count": int(vals.size),
        }
    reference = {
        "source": "paper-citation",
        "optimizer": "r-qaoa",
        "values": (
            {label: {"mean": m, "std": s} for label, (m, s) in RQAOA_REFERENCE_MAXCUT.items()}
            if config.family == KIND_MAXCUT
            else {str(n): {"mean": m} for n, m in RQAOA_REFERENCE_SK.items()}
        ),
    }
    return {
        "schema_version": SCHEMA_VERSION,
        "family": config.family,
        "report_iter": config.report_iter,
        "config": config.to_dict(),
        "cells": cells,
        "reference": {"r_qaoa": reference},
    }


def check_summary(records, summary) -> None:
    """Spot-check: every summary statistic must be recomputable from records."""
    config = BenchConfig.from_dict(summary["config"])
    recomputed = summarize(records, config)
    if recomputed["cells"] != summary["cells"]:
        raise ConfigError("summary statistics do not match the record CSV")


def write_summary(summary, path):
    Path(path).write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")


def read_summary(path):
    return json.loads(Path(path).read_text())


def generate_instance_files(config: BenchConfig) -> list[str]:
    """Write every instance of the benchmark grid as JSON; idempotent."""
    out = Path(config.out_dir) / "instances"
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for p_edge, n in config.cells():
        for idx in range(config.instances_per_cell):
            instance = config.make_instance(n, p_edge, idx)
            name = f"{config.family}"
            if p_edge is not None:
                name += f"_pe{p_edge:.6f}"
            name += f"_n{n:02d}_i{idx:03d}.json"
            save_instance(instance, out / name)
            written.append(str(out / name))
    return written
