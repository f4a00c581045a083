"""
定位方法注册表

把 CLI / 配置文件中的方法名映射到：参数构造（扁平键值 → 参数 dataclass）、
参数展开（写入 manifest 和 --help）、以及运行函数。
localize 命令与 run_experiment 共用这张表。
"""

from collections.abc import Callable, Mapping
from dataclasses import asdict, dataclass, fields, replace
from typing import Any

import numpy as np

from .baselines import (
    KdqParams,
    LddParams,
    MbdlParams,
    RfHeuristicParams,
    kdq_tree_localize,
    ldd_dis_localize,
    mbdl_permutation_localize,
    rf_heuristic_localize,
)
from .config import build_params
from .conformal import CPConfig, SplitCPConfig, cp_drift_localization, split_conformal_localization
from .core import LabeledDataset, LocalizationResult, Orientation
from .errors import ConfigError
from .models import ModelKind, ModelSpec
from .utils import make_rng


@dataclass(frozen=True)
class Method:
    """
    一个可运行的定位方法

    Attributes:
        name: 方法名
        summary: 一行说明
        build: (扁平参数, 字段路径前缀) -> 参数对象
        flatten: 参数对象 -> 扁平参数（全部默认值已展开）
        run: (数据集, 参数对象, 种子, jobs) -> LocalizationResult
        hidden: 不在帮助与错误信息中列出
    """
    name: str
    summary: str
    build: Callable[[Mapping[str, Any], str], Any]
    flatten: Callable[[Any], dict[str, Any]]
    run: Callable[[LabeledDataset, Any, int, int], LocalizationResult]
    hidden: bool = False

    def defaults(self) -> dict[str, Any]:
        return self.flatten(self.build({}, ""))

    def resolve(self, mapping: Mapping[str, Any], prefix: str = "") -> dict[str, Any]:
        """校验参数并返回展开默认值后的扁平参数"""
        return self.flatten(self.build(mapping, prefix))


def _path(prefix: str, key: str) -> str:
    return f"{prefix}.{key}" if prefix else key


def _check_keys(mapping: Mapping[str, Any], allowed: set[str], prefix: str) -> None:
    for key in mapping:
        if key not in allowed:
            raise ConfigError(f"未知参数，可用参数: {sorted(allowed)}", field=_path(prefix, key))


# ---- bootstrap conformal ----

_CP_KEYS = ("n_boot", "bootstrap_pool_factor", "bootstrap_selection", "median_convention")


def _cp_builder(kind: ModelKind) -> Callable[[Mapping[str, Any], str], CPConfig]:
    def build(mapping: Mapping[str, Any], prefix: str) -> CPConfig:
        _check_keys(mapping, set(_CP_KEYS) | ModelSpec.param_names(kind), prefix)
        model_part = {k: v for k, v in mapping.items() if k not in _CP_KEYS}
        config = build_params(CPConfig, {k: v for k, v in mapping.items() if k in _CP_KEYS}, prefix)
        return replace(config, model=ModelSpec.from_mapping(kind, model_part, prefix))
    return build


def _flatten_cp(config: CPConfig) -> dict[str, Any]:
    flat = {key: getattr(config, key) for key in _CP_KEYS}
    flat.update(asdict(config.model.params))
    return flat


def _run_cp(ds: LabeledDataset, config: CPConfig, seed: int, jobs: int) -> LocalizationResult:
    return cp_drift_localization(ds, replace(config, rng_seed=seed), jobs=jobs).to_result()


# ---- split conformal ----

def _build_split(mapping: Mapping[str, Any], prefix: str) -> SplitCPConfig:
    kind_name = mapping.get("model", ModelKind.DECISION_TREE.value)
    try:
        kind = ModelKind(kind_name)
    except ValueError as e:
        raise ConfigError(
            f"未知模型类型 {kind_name!r}，可选 {[k.value for k in ModelKind]}", field=_path(prefix, "model")
        ) from e
    _check_keys(mapping, {"split_fraction", "model"} | ModelSpec.param_names(kind), prefix)
    model_part = {k: v for k, v in mapping.items() if k not in ("split_fraction", "model")}
    split_part = {k: v for k, v in mapping.items() if k == "split_fraction"}
    config = build_params(SplitCPConfig, split_part, prefix)
    return replace(config, model=ModelSpec.from_mapping(kind, model_part, prefix))


def _flatten_split(config: SplitCPConfig) -> dict[str, Any]:
    flat = {"split_fraction": config.split_fraction, "model": config.model.kind.value}
    flat.update(asdict(config.model.params))
    return flat


def _run_split(ds: LabeledDataset, config: SplitCPConfig, seed: int, jobs: int) -> LocalizationResult:
    return split_conformal_localization(ds, config=replace(config, rng_seed=seed)).to_result()


# ---- baselines ----

def _builder(cls: type) -> Callable[[Mapping[str, Any], str], Any]:
    return lambda mapping, prefix: build_params(cls, mapping, prefix)


def _flatten(params: Any) -> dict[str, Any]:
    return {f.name: getattr(params, f.name) for f in fields(params)}


@dataclass(frozen=True)
class RandomParams:
    """无参数"""


def random_localize(ds: LabeledDataset, seed: int) -> LocalizationResult:
    """与数据无关的均匀随机分数（零假设基准）"""
    return LocalizationResult(values=make_rng(seed).random(ds.n_samples), orientation=Orientation.SCORE)


METHODS: dict[str, Method] = {
    method.name: method
    for method in [
        Method(
            "cp-dt", "bootstrap conformal p-values, decision tree",
            _cp_builder(ModelKind.DECISION_TREE), _flatten_cp, _run_cp,
        ),
        Method(
            "cp-mlp", "bootstrap conformal p-values, MLP",
            _cp_builder(ModelKind.MLP), _flatten_cp, _run_cp,
        ),
        Method(
            "split-cp", "split conformal p-values (single train/calibration partition)",
            _build_split, _flatten_split, _run_split,
        ),
        Method(
            "mbdl", "decision trees on bootstraps with leaf-entropy permutation test",
            _builder(MbdlParams), _flatten,
            lambda ds, p, seed, jobs: mbdl_permutation_localize(ds, p, seed, jobs),
        ),
        Method(
            "rf-heur", "random forest OOB total-variation heuristic",
            _builder(RfHeuristicParams), _flatten,
            lambda ds, p, seed, jobs: rf_heuristic_localize(ds, p, seed, jobs),
        ),
        Method(
            "ldd", "LDD-DIS k-nearest-neighbour local drift degree",
            _builder(LddParams), _flatten,
            lambda ds, p, seed, jobs: ldd_dis_localize(ds, p, seed),
        ),
        Method(
            "kdq", "kdq-tree leaf KL divergence",
            _builder(KdqParams), _flatten,
            lambda ds, p, seed, jobs: kdq_tree_localize(ds, p),
        ),
        Method(
            "random", "uniform random scores (null baseline)",
            _builder(RandomParams), _flatten,
            lambda ds, p, seed, jobs: random_localize(ds, seed),
            hidden=True,
        ),
    ]
}

PUBLIC_METHODS = tuple(name for name, method in METHODS.items() if not method.hidden)


def get_method(name: str) -> Method:
    """
    按名称查找方法

    Raises:
        ConfigError: 未知方法名（消息中列出可用方法）
    """
    try:
        return METHODS[name]
    except KeyError:
        raise ConfigError(
            f"未知方法 {name!r}，可用方法: {', '.join(PUBLIC_METHODS)}", field="method"
        ) from None


def run_method(name: str, ds: LabeledDataset, params: Mapping[str, Any], seed: int, jobs: int = 1) -> LocalizationResult:
    """按名称和扁平参数运行一个方法"""
    method = get_method(name)
    return method.run(ds, method.build(params, name), seed, jobs)


def score_summary(result: LocalizationResult) -> str:
    """一行结果摘要"""
    values = result.values[result.assigned]
    if values.size == 0:
        return "no samples assigned"
    return (
        f"{result.n_assigned}/{len(result)} assigned, {result.orientation.value} "
        f"min={np.min(values):.4g} median={np.median(values):.4g} max={np.max(values):.4g}"
    )
