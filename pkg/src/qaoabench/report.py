"""Report emission: plot-data files in plain delimited text plus rendered
matplotlib figures, all derived from the benchmark's record CSVs.

Two shapes are produced per (density, size) cell of the grid:
  * loss-vs-iteration series (mean and std over instances, per optimizer),
  * parameter-space trajectories (gamma, beta, cost per iteration) for
    single-layer runs.
Each data file is written alongside a PNG rendering of the same content.
"""

from __future__ import annotations

import csv
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .bench import BenchConfig, cell_key, check_summary, density_label, run_id_for
from .exceptions import ConfigError

OPTIMIZER_COLORS = {
    "qlstm": "tab:green",
    "lstm": "tab:blue",
    "rmsprop": "tab:orange",
    "sgd": "tab:red",
    "adam": "tab:purple",
    "adagrad": "tab:brown",
    "nelder-mead": "tab:gray",
}


def _fmt(value) -> str:
    return repr(value) if isinstance(value, float) else str(value)


def find_missing_cells(records, config: BenchConfig) -> list[str]:
    """Expected (optimizer, density, size) cells with no recorded rows."""
    present = {(r.optimizer, r.p_edge, r.n) for r in records}
    missing = []
    for p_edge, n in config.cells():
        for optimizer in config.optimizers:
            if (optimizer, p_edge, n) not in present:
                missing.append(cell_key(optimizer, n, p_edge))
    return missing


def _series_by_cell(records):
    """(p_edge, n, optimizer) -> iter -> list of raw costs."""
    series = defaultdict(lambda: defaultdict(list))
    for r in records:
        series[(r.p_edge, r.n, r.optimizer)][r.iter].append(r.raw_cost)
    return series


def write_loss_series(records, config: BenchConfig, out_dir) -> list[Path]:
    """Loss-vs-iteration tables: one file per (density, size), one row per
    (optimizer, iteration) holding mean and std over instances."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    series = _series_by_cell(records)
    written = []
    for p_edge, n in config.cells():
        name = f"loss_vs_iter_{config.family}"
        if p_edge is not None:
            name += f"_pe{p_edge:.6f}"
        name += f"_n{n:02d}.csv"
        path = out_dir / name
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["optimizer", "iter", "mean_cost", "std_cost"])
            for optimizer in config.optimizers:
                per_iter = series[(p_edge, n, optimizer)]
                for it in sorted(per_iter):
                    vals = np.array(per_iter[it])
                    writer.writerow(
                        [optimizer, it, _fmt(float(vals.mean())), _fmt(float(vals.std()))]
                    )
        written.append(path)
    return written


def plot_loss_series(records, config: BenchConfig, out_dir) -> list[Path]:
    out_dir = Path(out_dir)
    series = _series_by_cell(records)
    written = []
    for p_edge, n in config.cells():
        fig, ax = plt.subplots(figsize=(7, 4.5))
        for optimizer in config.optimizers:
            per_iter = series[(p_edge, n, optimizer)]
            if not per_iter:
                continue
            iters = np.array(sorted(per_iter))
            mean = np.array([np.mean(per_iter[i]) for i in iters])
            std = np.array([np.std(per_iter[i]) for i in iters])
            color = OPTIMIZER_COLORS.get(optimizer)
            ax.plot(iters, mean, label=optimizer, color=color)
            ax.fill_between(iters, mean - std, mean + std, alpha=0.15, color=color)
        title = f"{config.family} n={n}"
        if p_edge is not None:
            title += f", P={density_label(p_edge)}"
        ax.set_title(title)
        ax.set_xlabel("iteration")
        ax.set_ylabel("cost  $\\langle H_C \\rangle$")
        ax.legend(fontsize=8)
        name = f"loss_vs_iter_{config.family}"
        if p_edge is not None:
            name += f"_pe{p_edge:.6f}"
        name += f"_n{n:02d}.png"
        path = out_dir / name
        fig.tight_layout()
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)
    return written


def write_parameter_trajectories(records, theta_rows, config: BenchConfig, out_dir) -> list[Path]:
    """Per-(density, size) tables of (gamma, beta, cost) per iteration for
    single-layer runs; every trajectory starts at gamma = beta = 0."""
    if config.p != 1:
        return []
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cost_by_run = {(r.run_id, r.iter): r.raw_cost for r in records}
    theta_by_run = defaultdict(list)
    for row in theta_rows:
        theta_by_run[row[0]].append(row)
    written = []
    for p_edge, n in config.cells():
        name = f"trajectories_{config.family}"
        if p_edge is not None:
            name += f"_pe{p_edge:.6f}"
        name += f"_n{n:02d}.csv"
        path = out_dir / name
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["run_id", "optimizer", "iter", "gamma", "beta", "cost"])
            for optimizer in config.optimizers:
                for idx in range(config.instances_per_cell):
                    run_id = run_id_for(config.family, p_edge, n, idx, optimizer)
                    for row in sorted(theta_by_run.get(run_id, []), key=lambda r: r[1]):
                        _rid, it, gamma, beta = row[0], row[1], row[2], row[3]
                        writer.writerow([
                            run_id, optimizer, it, _fmt(gamma), _fmt(beta),
                            _fmt(cost_by_run[(run_id, it)]),
                        ])
        written.append(path)
    return written


def plot_parameter_trajectories(records, theta_rows, config: BenchConfig, out_dir) -> list[Path]:
    if config.p != 1:
        return []
    out_dir = Path(out_dir)
    theta_by_run = defaultdict(list)
    for row in theta_rows:
        theta_by_run[row[0]].append(row)
    written = []
    for p_edge, n in config.cells():
        fig, ax = plt.subplots(figsize=(6, 5))
        for optimizer in config.optimizers:
            color = OPTIMIZER_COLORS.get(optimizer)
            for idx in range(config.instances_per_cell):
                run_id = run_id_for(config.family, p_edge, n, idx, optimizer)
                rows = sorted(theta_by_run.get(run_id, []), key=lambda r: r[1])
                if not rows:
                    continue
                gammas = [r[2] for r in rows]
                betas = [r[3] for r in rows]
                ax.plot(gammas, betas, alpha=0.4, linewidth=0.8, color=color,
                        label=optimizer if idx == 0 else None)
        ax.scatter([0.0], [0.0], marker="*", s=80, color="black", zorder=5, label="start")
        title = f"{config.family} n={n} parameter trajectories"
        if p_edge is not None:
            title += f", P={density_label(p_edge)}"
        ax.set_title(title)
        ax.set_xlabel("$\\gamma$")
        ax.set_ylabel("$\\beta$")
        ax.legend(fontsize=8)
        name = f"trajectories_{config.family}"
        if p_edge is not None:
            name += f"_pe{p_edge:.6f}"
        name += f"_n{n:02d}.png"
        path = out_dir / name
        fig.tight_layout()
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)
    return written


def generate_report(records, theta_rows, summary, out_dir) -> list[Path]:
    """Validate inputs, spot-check the summary, and emit all report files."""
    config = BenchConfig.from_dict(summary["config"])
    missing = find_missing_cells(records, config)
    if missing:
        raise ConfigError(
            "records are missing cells: " + ", ".join(sorted(missing))
        )
    check_summary(records, summary)
    out_dir = Path(out_dir)
    written = []
    written += write_loss_series(records, config, out_dir)
    written += plot_loss_series(records, config, out_dir)
    written += write_parameter_trajectories(records, theta_rows, config, out_dir)
    written += plot_parameter_trajectories(records, theta_rows, config, out_dir)
    return written
