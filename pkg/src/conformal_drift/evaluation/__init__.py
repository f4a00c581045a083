"""
评估模块

ROC-AUC、重复实验框架、参数扫描与结果输出
"""

from .experiment import (
    BenchConfig,
    DataConfig,
    ExperimentConfig,
    ResultTable,
    load_bench_config,
    load_dataset,
    parse_bench_config,
    repetition_seeds,
    run_experiment,
)
from .metrics import result_auc, roc_auc
from .report import (
    curve_frame,
    emit_boxplot,
    emit_curve,
    emit_results,
    emit_summary,
    results_frame,
    summarize_tables,
)
from .sweeps import (
    SWEEP_PARAMETERS,
    SweepCurve,
    bootstrap_sweep,
    parameter_sweep,
    parse_grid,
    split_size_sweep,
)

__all__ = [
    "roc_auc",
    "result_auc",
    "DataConfig",
    "ExperimentConfig",
    "ResultTable",
    "BenchConfig",
    "repetition_seeds",
    "load_dataset",
    "run_experiment",
    "parse_bench_config",
    "load_bench_config",
    "SweepCurve",
    "SWEEP_PARAMETERS",
    "parse_grid",
    "parameter_sweep",
    "bootstrap_sweep",
    "split_size_sweep",
    "results_frame",
    "curve_frame",
    "emit_results",
    "emit_curve",
    "emit_summary",
    "summarize_tables",
    "emit_boxplot",
]
