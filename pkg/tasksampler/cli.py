"""Command-line entry point: train, verify-prop1 (alias verify-greedy), bench, compare, sweep, gen-data."""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np
from pydantic import ValidationError

from tasksampler.config import configure_logging, load_run_config, settings
from tasksampler.errors import TaskSamplerError
from tasksampler.fewshot import save_dataset_csv
from tasksampler.harness import bench_grid, bench_overhead, compare_strategies, run_training, sweep_hyperparameters, verify_greedy_law
from tasksampler.schemas import RunConfig, SamplingStrategy
from tasksampler.synthdata import generate, write_superclusters_csv

logger = logging.getLogger(__name__)


def _int_list(text: str) -> List[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _float_list(text: str) -> List[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="flat key=value file; flags override its values")
    for name, field in RunConfig.model_fields.items():
        if name == "out":
            continue
        parser.add_argument(
            f"--{name.replace('_', '-')}",
            dest=name,
            default=None,
            metavar=name.upper(),
            help=f"default: {getattr(field.default, 'value', field.default)}",
        )


def _run_config(args: argparse.Namespace, out: Optional[Path] = None) -> RunConfig:
    overrides = {name: getattr(args, name) for name in RunConfig.model_fields if name != "out"}
    overrides["out"] = out
    return load_run_config(args.config, overrides)


def _out_dir(args: argparse.Namespace, default_name: str) -> Path:
    out = Path(args.out) if args.out else settings.output_root / default_name
    out.mkdir(parents=True, exist_ok=True)
    return out


# Command handlers
def train_command(args: argparse.Namespace) -> int:
    config = _run_config(args, args.out)
    run = run_training(config)
    final = run.final_metrics
    print(f"{run.run_dir}: accuracy {final.eval_accuracy_mean:.4f} +- {final.eval_accuracy_ci95:.4f}")
    return 0


def verify_command(args: argparse.Namespace) -> int:
    out = _out_dir(args, "verify-prop1")
    report = verify_greedy_law(
        args.num_classes, args.k, args.num_matrices, np.random.default_rng(args.seed), draws=args.draws
    )
    frame = report.to_frame()
    frame.to_csv(out / "greedy_law.csv", index=False, float_format="%.12g")
    print(frame.to_string(index=False))
    return 0


def bench_command(args: argparse.Namespace) -> int:
    out = _out_dir(args, "bench")
    config = _run_config(args)
    grid = bench_grid(_int_list(args.ks), _int_list(args.shots), _int_list(args.embed_dims))
    table = bench_overhead(config, grid, iterations=args.bench_iterations, warmup=args.warmup, rounds=args.rounds)
    table.to_csv(out / "timing.csv", index=False, float_format="%.6f")
    print(table.to_string(index=False))
    return 0


def compare_command(args: argparse.Namespace) -> int:
    config = _run_config(args)
    out = _out_dir(args, "compare")
    strategies = [SamplingStrategy(s) for s in args.strategies.split(",")]
    seeds = list(range(config.seed, config.seed + args.num_seeds))
    summary = compare_strategies(config, strategies, seeds, out, workers=args.workers)
    print(summary.to_string(index=False))
    return 0


def sweep_command(args: argparse.Namespace) -> int:
    config = _run_config(args)
    out = _out_dir(args, "sweep")
    seeds = list(range(config.seed, config.seed + args.num_seeds))
    summary = sweep_hyperparameters(config, _float_list(args.alphas), _float_list(args.taus), seeds, out, args.workers)
    print(summary.to_string(index=False))
    return 0


def gen_data_command(args: argparse.Namespace) -> int:
    out = _out_dir(args, "data")
    spec = _run_config(args).cluster_spec()
    save_dataset_csv(generate(spec), out / "dataset.csv")
    write_superclusters_csv(spec, out / "superclusters.csv")
    print(out / "dataset.csv")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tasksampler", description="Adaptive task sampling for episodic few-shot training.")
    parser.add_argument("--log-level", default=None, help=f"default: {settings.log_level}")
    commands = parser.add_subparsers(dest="command", required=True)

    train = commands.add_parser("train", help="meta-train one learner with one sampling strategy")
    _add_run_flags(train)
    train.add_argument("--out", type=Path)
    train.set_defaults(handler=train_command)

    verify = commands.add_parser(
        "verify-prop1", aliases=["verify-greedy"], help="compare exact and greedy class-pair laws"
    )
    verify.add_argument("--num-classes", type=int, default=6)
    verify.add_argument("--k", type=int, default=3)
    verify.add_argument("--num-matrices", type=int, default=10)
    verify.add_argument("--draws", type=int, default=100_000)
    verify.add_argument("--seed", type=int, default=0)
    verify.add_argument("--out", type=Path)
    verify.set_defaults(handler=verify_command)

    bench = commands.add_parser("bench", help="time random vs gcp-hard training iterations")
    _add_run_flags(bench)
    bench.add_argument("--ks", default="5,10,15,20")
    bench.add_argument("--shots", default="1,5")
    bench.add_argument("--embed-dims", default="16,64")
    bench.add_argument("--bench-iterations", type=int, default=200)
    bench.add_argument("--warmup", type=int, default=20)
    bench.add_argument("--rounds", type=int, default=10, help="alternating random/gcp blocks per grid point")
    bench.add_argument("--out", type=Path)
    bench.set_defaults(handler=bench_command)

    compare = commands.add_parser("compare", help="compare sampling strategies over paired seeds")
    _add_run_flags(compare)
    compare.add_argument("--strategies", default=",".join(s.value for s in SamplingStrategy))
    compare.add_argument("--num-seeds", type=int, default=20)
    compare.add_argument("--workers", type=int, default=None)
    compare.add_argument("--out", type=Path)
    compare.set_defaults(handler=compare_command)

    sweep = commands.add_parser("sweep", help="alpha/tau sensitivity of gcp-sampling")
    _add_run_flags(sweep)
    sweep.add_argument("--alphas", default="0.25,0.5,1,2")
    sweep.add_argument("--taus", default="0.25,0.5,0.75,1")
    sweep.add_argument("--num-seeds", type=int, default=5)
    sweep.add_argument("--workers", type=int, default=None)
    sweep.add_argument("--out", type=Path)
    sweep.set_defaults(handler=sweep_command)

    gen_data = commands.add_parser("gen-data", help="write the synthetic dataset and its supercluster sidecar")
    _add_run_flags(gen_data)
    gen_data.add_argument("--out", type=Path)
    gen_data.set_defaults(handler=gen_data_command)
    return parser


def _one_line(exc: Exception) -> str:
    if isinstance(exc, ValidationError):
        return "; ".join(f"{'.'.join(str(p) for p in err['loc']) or 'config'}: {err['msg']}" for err in exc.errors())
    return " ".join(str(exc).split()) or type(exc).__name__


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        return args.handler(args)
    except (TaskSamplerError, ValidationError, ValueError, OSError) as exc:
        logger.debug("command failed", exc_info=True)
        print(f"error: {type(exc).__name__}: {_one_line(exc)}", file=sys.stderr)
        return 1
