"""Command-line harness: instance generation, meta-training, benchmarking,
and report emission.

Configuration comes from an optional JSON file (one flat object) with
command-line flags taking precedence.  Exit codes: 0 success, 2
configuration error, 3 numerical divergence.  The only environment variable
read is QAOABENCH_LOG (logging verbosity).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from fractions import Fraction
from pathlib import Path

from .bench import (
    BenchConfig,
    execute_bench,
    generate_instance_files,
    read_records_csv,
    read_summary,
    read_thetas_csv,
    summarize,
    write_records_csv,
    write_summary,
    write_thetas_csv,
)
from .cells import load_weights, save_weights
from .exceptions import ConfigError, DivergenceError
from .meta import MetaConfig, meta_train
from .report import generate_report

logger = logging.getLogger("qaoabench")

CHECKPOINT_EVERY = 50


def parse_density(text: str) -> float:
    try:
        if "/" in text:
            frac = Fraction(text)
            return float(frac)
        return float(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"cannot parse edge probability {text!r}") from exc


def parse_int_list(text: str) -> list[int]:
    return [int(tok) for tok in text.split(",") if tok]


def load_config_file(path) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return data


def merged_settings(args) -> dict:
    """Config-file values overridden by any flag the user set."""
    settings = load_config_file(getattr(args, "config", None))
    overrides = {
        "master_seed": getattr(args, "seed", None),
        "out_dir": getattr(args, "out", None),
        "workers": getattr(args, "workers", None),
        "family": getattr(args, "family", None),
    }
    if getattr(args, "sizes", None):
        overrides["sizes"] = parse_int_list(args.sizes)
    if getattr(args, "p_edge", None):
        overrides["p_edges"] = [parse_density(tok) for tok in args.p_edge.split(",")]
    if getattr(args, "optimizer", None):
        overrides["optimizers"] = [tok for tok in args.optimizer.split(",") if tok]
    if getattr(args, "instances", None) is not None:
        overrides["instances_per_cell"] = args.instances
    if getattr(args, "eval_t", None) is not None:
        overrides["eval_T"] = args.eval_t
    if getattr(args, "report_iter", None) is not None:
        overrides["report_iter"] = args.report_iter
    if getattr(args, "checkpoint", None):
        checkpoints = dict(settings.get("checkpoints", {}))
        for item in args.checkpoint:
            if "=" not in item:
                raise ConfigError(f"--checkpoint expects optimizer=path, got {item!r}")
            opt, path = item.split("=", 1)
            checkpoints[opt] = path
        overrides["checkpoints"] = checkpoints
    settings.update({k: v for k, v in overrides.items() if v is not None})
    return settings


def bench_config_from(args) -> BenchConfig:
    settings = merged_settings(args)
    try:
        return BenchConfig.from_dict(settings)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def meta_config_from(args, settings) -> MetaConfig:
    fields = {f for f in MetaConfig.__dataclass_fields__}
    kwargs = {k: v for k, v in settings.items() if k in fields}
    if settings.get("master_seed") is not None:
        kwargs["seed"] = settings["master_seed"]
    if "p_edges" in settings and settings["p_edges"]:
        kwargs["p_edge"] = settings["p_edges"][0]
    if getattr(args, "optimizer", None):
        kwargs["optimizer_kind"] = args.optimizer
    if getattr(args, "iters", None) is not None:
        kwargs["meta_iters"] = args.iters
    try:
        return MetaConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def cmd_gen(args) -> int:
    config = bench_config_from(args)
    written = generate_instance_files(config)
    print(f"wrote {len(written)} instance files under {Path(config.out_dir) / 'instances'}")
    return 0


def cmd_train(args) -> int:
    settings = merged_settings(args)
    config = meta_config_from(args, settings)
    out_dir = Path(settings.get("out_dir", "train_out"))
    out_dir.mkdir(parents=True, exist_ok=True)
    ckpt_path = out_dir / f"checkpoint_{config.optimizer_kind}.json"
    log_path = out_dir / f"training_log_{config.optimizer_kind}.csv"

    init = None
    resume = None
    if args.resume:
        init, extras = load_weights(args.resume)
        if init.kind != config.optimizer_kind:
            raise ConfigError(
                f"resume checkpoint holds {init.kind!r}, expected {config.optimizer_kind!r}"
            )
        resume = extras
        logger.info("resuming from %s at meta_iter=%s", args.resume, extras.get("meta_iter"))

    log_rows = []

    def on_iteration(k, weights, mean_loss, adam_state):
        if (k + 1) % CHECKPOINT_EVERY == 0:
            save_weights(weights, ckpt_path, meta_iter=k + 1, adam_state=adam_state)

    weights, log = meta_train(config, init=init, resume=resume, on_iteration=on_iteration)
    log_rows.extend(log)
    final_iter = log[-1][0] + 1 if log else (resume or {}).get("meta_iter") or 0
    save_weights(weights, ckpt_path, meta_iter=final_iter)

    new_file = not log_path.exists() or not args.resume
    with open(log_path, "a" if args.resume else "w", newline="") as fh:
        writer = csv.writer(fh)
        if new_file:
            writer.writerow(["meta_iter", "mean_meta_loss", "wallclock_s"])
        for k, loss, wallclock in log_rows:
            writer.writerow([k, repr(loss), repr(wallclock)])
    print(f"trained {config.optimizer_kind} for {len(log_rows)} iterations")
    print(f"checkpoint: {ckpt_path}")
    print(f"training log: {log_path}")
    return 0


def cmd_bench(args) -> int:
    config = bench_config_from(args)
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    records, theta_rows = execute_bench(config)
    write_records_csv(records, out_dir / "records.csv")
    write_thetas_csv(theta_rows, out_dir / "thetas.csv", config.p)
    summary = summarize(records, config)
    write_summary(summary, out_dir / "summary.json")
    print(f"ran {len({r.run_id for r in records})} runs; wrote records.csv, thetas.csv, summary.json in {out_dir}")
    for key, cell in summary["cells"].items():
        print(f"  {key}: {cell['mean']:.3f} +- {cell['std']:.3f} (count {cell['count']})")
    return 0


def cmd_report(args) -> int:
    settings = merged_settings(args)
    out_dir = Path(settings.get("out_dir", "bench_out"))
    records_path = out_dir / "records.csv"
    summary_path = out_dir / "summary.json"
    thetas_path = out_dir / "thetas.csv"
    for path in (records_path, summary_path, thetas_path):
        if not path.exists():
            raise ConfigError(f"missing benchmark output: {path}")
    records = read_records_csv(records_path)
    _header, theta_rows = read_thetas_csv(thetas_path)
    summary = read_summary(summary_path)
    written = generate_report(records, theta_rows, summary, out_dir / "report")
    print(f"wrote {len(written)} report files under {out_dir / 'report'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qaoabench",
        description="QAOA benchmark harness with learned and classical optimizers",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file; flags override its values")
        p.add_argument("--seed", type=int, help="master seed")
        p.add_argument("--out", help="output directory")
        p.add_argument("--workers", type=int, help="parallel worker processes")
        p.add_argument("--family", choices=["maxcut", "sk"], help="instance family")
        p.add_argument("--sizes", help="comma-separated node counts")
        p.add_argument("--p-edge", dest="p_edge", help="comma-separated edge probabilities (e.g. 3/7)")

    p_gen = sub.add_parser("gen", help="write benchmark instances as JSON files")
    common(p_gen)
    p_gen.add_argument("--instances", type=int, help="instances per (density, size) cell")
    p_gen.set_defaults(func=cmd_gen)

    p_train = sub.add_parser("train", help="meta-train a recurrent optimizer")
    common(p_train)
    p_train.add_argument("--optimizer", choices=["qlstm", "lstm"], help="cell kind")
    p_train.add_argument("--iters", type=int, help="meta-iterations to run")
    p_train.add_argument("--resume", help="checkpoint to continue from")
    p_train.set_defaults(func=cmd_train)

    p_bench = sub.add_parser("bench", help="run the benchmark grid")
    common(p_bench)
    p_bench.add_argument("--optimizer", help="comma-separated optimizer list")
    p_bench.add_argument("--instances", type=int, help="instances per cell")
    p_bench.add_argument("--eval-t", dest="eval_t", type=int, help="inference iterations")
    p_bench.add_argument("--report-iter", dest="report_iter", type=int, help="summary iteration")
    p_bench.add_argument(
        "--checkpoint", action="append",
        help="optimizer=path of a trained checkpoint (repeatable)",
    )
    p_bench.set_defaults(func=cmd_bench)

    p_report = sub.add_parser("report", help="emit plot data and figures from bench output")
    common(p_report)
    p_report.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    level = os.environ.get("QAOABENCH_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except DivergenceError as exc:
        print(f"numerical divergence: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
