"""
Conformal Drift Localization CLI

命令行入口：
- localize: 对一个 embedding CSV 运行一种定位方法，输出每个样本的 p-value / 分数
- bench: 按 YAML 配置对多个方法做重复实验，输出每个方法的 ROC-AUC 表、汇总表与箱线图
- sweep: bootstrap 数或 split 比例扫描，输出曲线 CSV 与 SVG

退出码：0 成功，2 用法/配置错误，3 数据错误，4 数值计算失败。
所有输出旁都会写一份 RunManifest（YAML）。
"""

import argparse
import os
import sys
from pathlib import Path
from typing import Optional

import pandas as pd
from dotenv import load_dotenv
from rich.console import Console
from rich.table import Table

from . import __version__
from .config import get_runtime_settings, parse_param_assignments
from .data import load_embedding_csv
from .errors import ConfigError, DataError, DegenerateTruthError, DriftLocalizationError, NumericalError
from .evaluation import (
    SWEEP_PARAMETERS,
    emit_boxplot,
    emit_curve,
    emit_results,
    emit_summary,
    load_bench_config,
    parse_grid,
    result_auc,
    run_experiment,
)
from .evaluation.report import CSV_OPTIONS
from .evaluation.sweeps import bootstrap_sweep, split_size_sweep
from .manifest import RunManifest, manifest_path_for
from .methods import PUBLIC_METHODS, get_method, score_summary
from .utils import setup_logging


# 加载环境变量（override=True 确保 .env 文件覆盖系统环境变量）
load_dotenv(override=True)

# Rich Console 配置：支持 Windows 和 NO_COLOR 环境变量
console = Console(
    legacy_windows=(sys.platform == 'win32'),
    no_color=os.getenv('NO_COLOR') is not None,
)

# sweep 未配置 methods 时使用的默认方法
_SWEEP_DEFAULT_METHODS = {
    "bootstraps": {"cp-dt": {}},
    "splitsize": {"split-cp": {}},
}


class HelpFormatter(argparse.RawDescriptionHelpFormatter, argparse.ArgumentDefaultsHelpFormatter):
    """保留 epilog 排版，同时在每个参数后显示默认值"""


def method_defaults_epilog() -> str:
    """各方法参数及默认值（与 manifest 中展开的默认值一致）"""
    lines = ["Method parameters (--param key=value), with defaults:"]
    for name in PUBLIC_METHODS:
        defaults = get_method(name).defaults()
        rendered = ", ".join(f"{k}={v}" for k, v in defaults.items()) or "(none)"
        lines.append(f"  {name}: {rendered}")
    return "\n".join(lines)


# === 子命令 ===

def cmd_localize(args: argparse.Namespace, jobs: int) -> Path:
    """对单个 CSV 运行定位方法"""
    ds, truth = load_embedding_csv(args.input)
    method = get_method(args.method)
    overrides = parse_param_assignments(args.param)
    params = method.build(overrides, args.method)
    result = method.run(ds, params, args.seed, jobs)

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame({
        "index": range(len(result)),
        "p_or_score": result.values,
        "assigned": result.assigned.astype(int),
    })
    frame.to_csv(out, **CSV_OPTIONS)

    manifest = RunManifest(
        command="localize",
        config={"method": args.method, "params": method.flatten(params)},
        seed=args.seed,
        version=__version__,
        arguments={"input": str(args.input), "method": args.method},
    )
    manifest.write(manifest_path_for(out))

    console.print(f"[green]✓[/green] {args.method}: {score_summary(result)}")
    if truth is not None and result.n_assigned:
        try:
            console.print(f"  ROC-AUC vs drift column: {result_auc(result, truth):.4f}")
        except DegenerateTruthError:
            pass
    console.print(f"[dim]written {out}[/dim]")
    return out


def _resolve_seed(cli_seed: Optional[int], manifest_seed: Optional[int]) -> int:
    if cli_seed is not None:
        return cli_seed
    if manifest_seed is not None:
        return int(manifest_seed)
    raise ConfigError("bench/sweep 必须显式给出 --seed（或使用 manifest 作为配置）", field="--seed")


def _print_summary(rows: list[tuple[str, dict, int, int]], title: str) -> None:
    table = Table(title=title)
    table.add_column("method", style="green")
    for column in ("mean", "median", "q25", "q75"):
        table.add_column(column, justify="right")
    table.add_column("reps", justify="right", style="dim")
    table.add_column("undefined", justify="right", style="dim")
    for name, summary, reps, undefined in rows:
        table.add_row(name, *(f"{summary[k]:.4f}" for k in ("mean", "median", "q25", "q75")), str(reps), str(undefined))
    console.print(table)


def cmd_bench(args: argparse.Namespace, jobs: int) -> Path:
    """按配置对每个方法运行重复实验"""
    settings = get_runtime_settings()
    config, manifest_seed = load_bench_config(args.config, default_repetitions=settings.default_repetitions)
    seed = _resolve_seed(args.seed, manifest_seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    tables = []
    for name in config.methods:
        table = run_experiment(config.experiment(name, seed), jobs=jobs)
        emit_results(table, out / f"results_{name}.csv", "csv")
        tables.append(table)
    emit_summary(tables, out / "summary.csv")
    if not args.no_svg:
        emit_boxplot(tables, out / "boxplot.svg")

    RunManifest(
        command="bench",
        config=config.to_mapping(),
        seed=seed,
        version=__version__,
    ).write(out / "manifest.yaml")

    _print_summary(
        [(t.method, t.summary(), len(t), t.n_undefined) for t in tables],
        title=f"ROC-AUC over {config.n_repetitions} repetitions (seed {seed})",
    )
    console.print(f"[dim]written {out}[/dim]")
    return out


def cmd_sweep(args: argparse.Namespace, jobs: int) -> Path:
    """bootstrap 数 / split 比例扫描"""
    settings = get_runtime_settings()
    config, manifest_seed = load_bench_config(
        args.config,
        default_methods=_SWEEP_DEFAULT_METHODS[args.kind],
        default_repetitions=settings.default_repetitions,
    )
    seed = _resolve_seed(args.seed, manifest_seed)
    grid_text = args.grid
    if grid_text is None and manifest_seed is not None:
        grid_text = RunManifest.load(args.config).arguments.get("grid")
    if grid_text is None:
        raise ConfigError("sweep 需要 --grid", field="--grid")
    grid = parse_grid(str(grid_text))
    parameter = SWEEP_PARAMETERS[args.kind]
    sweep = bootstrap_sweep if args.kind == "bootstraps" else split_size_sweep

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for name in config.methods:
        experiment = config.experiment(name, seed)
        if parameter not in experiment.method_params:
            raise ConfigError(f"方法 {name} 不支持 {args.kind} 扫描（缺少参数 {parameter}）", field=f"methods.{name}")
        curve = sweep(experiment, grid, jobs=jobs)
        emit_curve(curve, out / f"curve_{name}.csv", "csv")
        if not args.no_svg:
            emit_curve(curve, out / f"curve_{name}.svg", "svg")
        for value, table in zip(curve.grid_values, curve.tables):
            rows.append((f"{name} {parameter}={value}", table.summary(), len(table), table.n_undefined))

    RunManifest(
        command="sweep",
        config=config.to_mapping(),
        seed=seed,
        version=__version__,
        arguments={"kind": args.kind, "grid": str(grid_text)},
    ).write(out / "manifest.yaml")

    _print_summary(rows, title=f"{args.kind} sweep (seed {seed})")
    console.print(f"[dim]written {out}[/dim]")
    return out


# === 参数解析 ===

def build_parser() -> argparse.ArgumentParser:
    """构建参数解析器"""
    parser = argparse.ArgumentParser(
        prog="conformal-drift",
        description="Conformal Drift Localization - 基于 bootstrap conformal p-value 的漂移定位与评测",
        formatter_class=HelpFormatter,
        epilog="""
Examples:
  # 对一个 embedding CSV 运行 CP-DT
  %(prog)s localize --input stream.csv --method cp-dt --param n_boot=100 --out pvalues.csv

  # 按配置文件做基准评测
  %(prog)s bench --config bench.yaml --seed 7 --out results/

  # bootstrap 数扫描
  %(prog)s sweep bootstraps --config sweep.yaml --grid "10,25,50,100" --seed 7 --out sweep/

  # split 比例扫描
  %(prog)s sweep splitsize --config sweep.yaml --grid "0.2..0.9 step 0.1" --seed 7 --out sweep/
""",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")

    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument(
        "--jobs",
        type=int,
        default=None,
        help="worker 数上限（默认：CONFORMAL_DRIFT_JOBS 或全部 CPU 核），不影响输出",
    )
    shared.add_argument(
        "--log-level",
        default=None,
        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
        help="日志级别（默认：CONFORMAL_DRIFT_LOG_LEVEL 或 WARNING）",
    )

    subparsers = parser.add_subparsers(dest="command", required=True)

    localize = subparsers.add_parser(
        "localize",
        parents=[shared],
        help="对一个 CSV 运行定位方法",
        formatter_class=HelpFormatter,
        epilog=method_defaults_epilog(),
    )
    localize.add_argument("--input", required=True, help="embedding CSV（列 t、可选 drift、f0..f{d-1}）")
    localize.add_argument("--method", required=True, choices=PUBLIC_METHODS, help="定位方法")
    localize.add_argument(
        "--param", action="append", default=[], metavar="KEY=VALUE", help="方法参数，可重复"
    )
    localize.add_argument("--seed", type=int, default=0, help="主种子")
    localize.add_argument("--out", required=True, help="输出 CSV（index, p_or_score, assigned）")
    localize.set_defaults(handler=cmd_localize)

    bench = subparsers.add_parser(
        "bench",
        parents=[shared],
        help="按配置文件做重复实验",
        formatter_class=HelpFormatter,
        epilog=method_defaults_epilog(),
    )
    bench.add_argument("--config", required=True, help="YAML 配置文件或 manifest.yaml")
    bench.add_argument("--seed", type=int, default=None, help="主种子（必需，除非 --config 是 manifest）")
    bench.add_argument("--out", required=True, help="输出目录")
    bench.add_argument("--no-svg", action="store_true", help="不输出箱线图")
    bench.set_defaults(handler=cmd_bench)

    sweep = subparsers.add_parser(
        "sweep",
        parents=[shared],
        help="bootstrap 数或 split 比例扫描",
        formatter_class=HelpFormatter,
        epilog=method_defaults_epilog(),
    )
    sweep.add_argument("kind", choices=sorted(SWEEP_PARAMETERS), help="扫描类型")
    sweep.add_argument("--config", required=True, help="YAML 配置文件或 manifest.yaml")
    sweep.add_argument(
        "--grid", default=None, help='网格，如 "10,25,50,100" 或 "0.2..0.9 step 0.1"'
    )
    sweep.add_argument("--seed", type=int, default=None, help="主种子（必需，除非 --config 是 manifest）")
    sweep.add_argument("--out", required=True, help="输出目录")
    sweep.add_argument("--no-svg", action="store_true", help="不输出曲线图")
    sweep.set_defaults(handler=cmd_sweep)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    """CLI 主入口，返回退出码"""
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        settings = get_runtime_settings()
        setup_logging(args.log_level or settings.log_level)
        if args.jobs is not None and args.jobs < 1:
            raise ConfigError(f"--jobs 必须 >= 1: {args.jobs}", field="--jobs")
        if args.seed is not None and args.seed < 0:
            raise ConfigError(f"--seed 必须非负: {args.seed}", field="--seed")
        args.handler(args, settings.resolve_jobs(args.jobs))
    except ConfigError as e:
        console.print(f"[red]配置错误:[/red] {e}")
        return 2
    except DataError as e:
        console.print(f"[red]数据错误:[/red] {e}")
        return 3
    except NumericalError as e:
        console.print(f"[red]数值错误:[/red] {e}")
        return 4
    except DriftLocalizationError as e:
        console.print(f"[red]内部错误:[/red] {e}")
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
