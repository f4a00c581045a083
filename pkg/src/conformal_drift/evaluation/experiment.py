"""
重复实验框架

每次重复 r 使用从主种子派生的两个子种子：
    data_seed   = derive_seed(seed, r)      生成数据
    method_seed = derive_seed(seed, r, 1)   运行方法
因此同一主种子下，不同方法、不同扫描点看到的是同一组数据（配对设计）。

bench / sweep 的 YAML 配置也在这里解析。
"""

import logging
import time
from collections.abc import Mapping
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np
import pandas as pd
import yaml

from ..config import build_params
from ..core import DriftGroundTruth, LabeledDataset
from ..data import ClassSwapSpec, NoDriftSpec, StreamSpec, SubclassSplitSpec, generate_stream, load_embedding_csv, with_seed
from ..errors import ConfigError, DataError, DegenerateTruthError
from ..methods import get_method
from ..utils import derive_seed, parallel_map
from .metrics import result_auc


logger = logging.getLogger(__name__)

_STREAM_KINDS: dict[str, type] = {
    "class_swap": ClassSwapSpec,
    "subclass_split": SubclassSplitSpec,
    "no_drift": NoDriftSpec,
}


@dataclass(frozen=True)
class DataConfig:
    """
    数据来源：合成数据流或 CSV 文件

    Attributes:
        kind: class_swap | subclass_split | no_drift | csv
        stream: 合成数据流参数（种子由重复编号派生，stream.seed 不使用）
        path: CSV 路径（kind=csv）
    """
    kind: str = "class_swap"
    stream: Optional[StreamSpec] = None
    path: Optional[str] = None

    def __post_init__(self):
        if self.kind == "csv":
            if not self.path:
                raise ConfigError("kind=csv 需要 path", field="data.path")
            return
        if self.kind not in _STREAM_KINDS:
            raise ConfigError(
                f"未知数据类型 {self.kind!r}，可选 {sorted(_STREAM_KINDS) + ['csv']}", field="data.kind"
            )
        if self.stream is None:
            object.__setattr__(self, "stream", _STREAM_KINDS[self.kind]())

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, Any]) -> "DataConfig":
        mapping = dict(mapping)
        kind = mapping.pop("kind", "class_swap")
        if kind == "csv":
            unknown = set(mapping) - {"path"}
            if unknown:
                raise ConfigError("kind=csv 只接受 path", field=f"data.{sorted(unknown)[0]}")
            return cls(kind="csv", path=mapping.get("path"))
        if kind not in _STREAM_KINDS:
            raise ConfigError(
                f"未知数据类型 {kind!r}，可选 {sorted(_STREAM_KINDS) + ['csv']}", field="data.kind"
            )
        mapping.pop("seed", None)
        return cls(kind=kind, stream=build_params(_STREAM_KINDS[kind], mapping, "data"))

    def to_mapping(self) -> dict[str, Any]:
        """展开全部默认值（不含种子）"""
        if self.kind == "csv":
            return {"kind": "csv", "path": self.path}
        flat = {"kind": self.kind, **asdict(self.stream)}
        flat.pop("seed")
        return flat


@dataclass(frozen=True)
class ExperimentConfig:
    """单个方法的重复实验配置"""
    method: str = "cp-dt"
    method_params: Mapping[str, Any] = field(default_factory=dict)
    data: DataConfig = field(default_factory=DataConfig)
    n_repetitions: int = 500
    seed: int = 0

    def __post_init__(self):
        if self.n_repetitions < 1:
            raise ConfigError(f"n_repetitions 必须 >= 1: {self.n_repetitions}", field="n_repetitions")
        if self.seed < 0:
            raise ConfigError(f"seed 必须非负: {self.seed}", field="seed")
        # 校验并展开方法参数
        resolved = get_method(self.method).resolve(self.method_params, f"methods.{self.method}")
        object.__setattr__(self, "method_params", resolved)


def repetition_seeds(seed: int, rep: int) -> tuple[int, int]:
    """第 rep 次重复的 (data_seed, method_seed)"""
    return derive_seed(seed, rep), derive_seed(seed, rep, 1)


@dataclass(frozen=True)
class ResultTable:
    """
    每次重复的 ROC-AUC 及摘要

    Attributes:
        method: 方法名
        auc: 每次重复的 AUC；无法定义（评估样本只有一类）时为 NaN
        n_evaluated: 参与评估的样本数
        n_excluded: 因未被赋值而排除的样本数
    """
    method: str
    auc: np.ndarray
    n_evaluated: np.ndarray
    n_excluded: np.ndarray

    def __len__(self) -> int:
        return int(self.auc.shape[0])

    @property
    def defined(self) -> np.ndarray:
        return self.auc[~np.isnan(self.auc)]

    @property
    def n_undefined(self) -> int:
        return int(np.isnan(self.auc).sum())

    def summary(self) -> dict[str, float]:
        """mean / median / q25 / q75（只统计有定义的重复）"""
        values = self.defined
        if values.size == 0:
            return {"mean": np.nan, "median": np.nan, "q25": np.nan, "q75": np.nan}
        q25, median, q75 = np.percentile(values, [25, 50, 75])
        return {"mean": float(values.mean()), "median": float(median), "q25": float(q25), "q75": float(q75)}

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "rep": np.arange(len(self)),
            "auc": self.auc,
            "n_evaluated": self.n_evaluated,
            "n_excluded": self.n_excluded,
        })


@dataclass(frozen=True)
class _Repetition:
    config: ExperimentConfig
    rep: int
    dataset: Optional[tuple[LabeledDataset, DriftGroundTruth]] = None


def load_dataset(data: DataConfig, seed: int) -> tuple[LabeledDataset, DriftGroundTruth]:
    """按数据配置得到 (数据集, 真值)"""
    if data.kind == "csv":
        ds, truth = load_embedding_csv(data.path)
        if truth is None:
            raise DataError(f"评估需要 drift 列: {data.path}")
        return ds, truth
    return generate_stream(with_seed(data.stream, seed))


def _run_repetition(task: _Repetition) -> tuple[float, int, int]:
    config = task.config
    data_seed, method_seed = repetition_seeds(config.seed, task.rep)
    ds, truth = task.dataset or load_dataset(config.data, data_seed)
    method = get_method(config.method)
    result = method.run(ds, method.build(config.method_params, config.method), method_seed, 1)
    n_evaluated = result.n_assigned
    try:
        auc = result_auc(result, truth)
    except DegenerateTruthError:
        auc = float("nan")
    return auc, n_evaluated, len(result) - n_evaluated


def run_experiment(config: ExperimentConfig, jobs: int = 1) -> ResultTable:
    """
    重复运行一个方法并计算每次的 ROC-AUC

    Args:
        config: 实验配置
        jobs: 并行 worker 数（不影响结果）

    Returns:
        ResultTable，按重复编号排序
    """
    started = time.perf_counter()
    dataset = load_dataset(config.data, 0) if config.data.kind == "csv" else None
    tasks = [_Repetition(config, rep, dataset) for rep in range(config.n_repetitions)]
    rows = parallel_map(_run_repetition, tasks, jobs)
    table = ResultTable(
        method=config.method,
        auc=np.array([r[0] for r in rows], dtype=np.float64),
        n_evaluated=np.array([r[1] for r in rows], dtype=np.int64),
        n_excluded=np.array([r[2] for r in rows], dtype=np.int64),
    )
    if table.n_undefined:
        logger.warning(
            "%s: %d of %d repetitions have no positive or no negative sample (AUC undefined)",
            config.method, table.n_undefined, len(table),
        )
    logger.info(
        "%s: %d repetitions, mean AUC %.4f, %.1fs",
        config.method, len(table), table.summary()["mean"], time.perf_counter() - started,
    )
    return table


# ---- YAML 配置 ----

_BENCH_KEYS = {"n_repetitions", "data", "methods"}


@dataclass(frozen=True)
class BenchConfig:
    """bench / sweep 配置文件的内容"""
    data: DataConfig
    methods: dict[str, dict[str, Any]]
    n_repetitions: int

    def experiment(self, method: str, seed: int) -> ExperimentConfig:
        return ExperimentConfig(
            method=method,
            method_params=self.methods[method],
            data=self.data,
            n_repetitions=self.n_repetitions,
            seed=seed,
        )

    def to_mapping(self) -> dict[str, Any]:
        """展开全部默认值后的配置（写入 manifest）"""
        return {
            "n_repetitions": self.n_repetitions,
            "data": self.data.to_mapping(),
            "methods": {
                name: get_method(name).resolve(params, f"methods.{name}")
                for name, params in self.methods.items()
            },
        }


def _key_lines(node: yaml.Node, prefix: str = "") -> dict[str, int]:
    """YAML 映射中每个键的点分路径 -> 行号（1 起始）"""
    lines: dict[str, int] = {}
    if isinstance(node, yaml.MappingNode):
        for key_node, value_node in node.value:
            path = f"{prefix}.{key_node.value}" if prefix else str(key_node.value)
            lines[path] = key_node.start_mark.line + 1
            lines.update(_key_lines(value_node, path))
    return lines


def _line_for(field_path: Optional[str], lines: dict[str, int]) -> Optional[int]:
    while field_path:
        if field_path in lines:
            return lines[field_path]
        field_path = field_path.rpartition(".")[0]
    return None


def parse_bench_config(
    mapping: Mapping[str, Any],
    default_methods: Optional[Mapping[str, Mapping[str, Any]]] = None,
    default_repetitions: int = 500,
) -> BenchConfig:
    """
    从已解析的映射构造 BenchConfig

    Raises:
        ConfigError: 未知键或取值无效（field 为点分路径）
    """
    if not isinstance(mapping, Mapping):
        raise ConfigError("配置文件顶层必须是映射")
    for key in mapping:
        if key not in _BENCH_KEYS:
            raise ConfigError(f"未知配置项，可用: {sorted(_BENCH_KEYS)}", field=str(key))

    n_repetitions = mapping.get("n_repetitions", default_repetitions)
    if not isinstance(n_repetitions, int) or isinstance(n_repetitions, bool) or n_repetitions < 1:
        raise ConfigError(f"n_repetitions 必须是正整数: {n_repetitions!r}", field="n_repetitions")

    data_section = mapping.get("data") or {}
    if not isinstance(data_section, Mapping):
        raise ConfigError("data 必须是映射", field="data")
    data = DataConfig.from_mapping(data_section)

    methods_section = mapping.get("methods")
    if methods_section is None:
        methods_section = dict(default_methods or {})
    if not isinstance(methods_section, Mapping) or not methods_section:
        raise ConfigError("methods 必须是非空映射（方法名 -> 参数）", field="methods")
    methods: dict[str, dict[str, Any]] = {}
    for name, params in methods_section.items():
        params = params or {}
        if not isinstance(params, Mapping):
            raise ConfigError("方法参数必须是映射", field=f"methods.{name}")
        try:
            get_method(str(name))
        except ConfigError as e:
            raise ConfigError(e.detail, field=f"methods.{name}") from e
        get_method(str(name)).resolve(params, f"methods.{name}")
        methods[str(name)] = dict(params)
    return BenchConfig(data=data, methods=methods, n_repetitions=n_repetitions)


def load_bench_config(
    path: str | Path,
    default_methods: Optional[Mapping[str, Mapping[str, Any]]] = None,
    default_repetitions: int = 500,
) -> tuple[BenchConfig, Optional[int]]:
    """
    读取 YAML 配置文件（也接受 RunManifest 文件）

    Returns:
        (配置, manifest 中记录的种子；普通配置为 None)

    Raises:
        ConfigError: 文件无法读取、YAML 语法错误或取值无效，消息带行号
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"无法读取配置文件 {path}: {e}") from e
    try:
        node = yaml.compose(text)
        mapping = yaml.safe_load(text)
    except yaml.MarkedYAMLError as e:
        line = e.problem_mark.line + 1 if e.problem_mark is not None else None
        raise ConfigError(f"YAML 语法错误: {e.problem}", line=line) from e
    except yaml.YAMLError as e:
        raise ConfigError(f"YAML 语法错误: {e}") from e

    lines = _key_lines(node) if node is not None else {}
    manifest_seed = None
    if isinstance(mapping, Mapping) and "config" in mapping and "command" in mapping:
        manifest_seed = mapping.get("seed")
        mapping = mapping["config"]
        lines = {k.removeprefix("config."): v for k, v in lines.items()}

    try:
        config = parse_bench_config(mapping or {}, default_methods, default_repetitions)
    except ConfigError as e:
        if e.line is None:
            raise ConfigError(e.detail, field=e.field, line=_line_for(e.field, lines)) from e
        raise
    return config, manifest_seed
