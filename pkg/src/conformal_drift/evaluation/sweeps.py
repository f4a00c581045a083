"""
参数扫描

对扫描网格的每个点调用 run_experiment，所有点共用主种子，
因此每个点看到同一组数据（配对比较）。曲线按中位数与四分位数汇总。
"""

import logging
import re
from collections.abc import Sequence
from dataclasses import dataclass, replace

import numpy as np

from ..errors import ConfigError
from .experiment import ExperimentConfig, ResultTable, run_experiment


logger = logging.getLogger(__name__)

SWEEP_PARAMETERS = {
    "bootstraps": "n_boot",
    "splitsize": "split_fraction",
}

_RANGE = re.compile(r"^\s*(\S+)\s*\.\.\s*(\S+)\s+step\s+(\S+)\s*$")


@dataclass(frozen=True)
class SweepCurve:
    """
    扫描结果

    Attributes:
        method: 方法名
        parameter: 被扫描的参数名
        grid_values: 网格点
        tables: 每个网格点的 ResultTable
    """
    method: str
    parameter: str
    grid_values: tuple[float, ...]
    tables: tuple[ResultTable, ...]

    def __len__(self) -> int:
        return len(self.grid_values)

    def _stat(self, key: str) -> np.ndarray:
        return np.array([table.summary()[key] for table in self.tables])

    @property
    def median(self) -> np.ndarray:
        return self._stat("median")

    @property
    def q25(self) -> np.ndarray:
        return self._stat("q25")

    @property
    def q75(self) -> np.ndarray:
        return self._stat("q75")

    @property
    def mean(self) -> np.ndarray:
        return self._stat("mean")


def _parse_number(token: str, raw: str) -> int | float:
    try:
        return int(token)
    except ValueError:
        pass
    try:
        value = float(token)
    except ValueError:
        raise ConfigError(f"网格中的无效值 {token!r}（输入 {raw!r}）", field="--grid") from None
    if not np.isfinite(value):
        raise ConfigError(f"网格中的无效值 {token!r}（输入 {raw!r}）", field="--grid")
    return value


def parse_grid(text: str) -> list[int | float]:
    """
    解析扫描网格

    支持逗号列表 "10,25,50,100" 和区间 "0.2..0.9 step 0.1"（包含两端）。

    Raises:
        ConfigError: 网格为空或含无效值（消息中给出该值）
    """
    match = _RANGE.match(text)
    if match:
        start, stop, step = (_parse_number(t, text) for t in match.groups())
        if step <= 0 or stop < start:
            raise ConfigError(f"无效区间 {text!r}：需要 start <= stop 且 step > 0", field="--grid")
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        values = [start + i * step for i in range(count)]
        if all(isinstance(v, int) for v in (start, stop, step)):
            return [int(v) for v in values]
        return [round(float(v), 12) for v in values]

    tokens = [t.strip() for t in text.split(",")]
    if not text.strip():
        raise ConfigError("网格不能为空", field="--grid")
    for token in tokens:
        if not token:
            raise ConfigError(f"网格中有空值: {text!r}", field="--grid")
    return [_parse_number(t, text) for t in tokens]


def parameter_sweep(
    config: ExperimentConfig,
    parameter: str,
    grid: Sequence[int | float],
    jobs: int = 1,
) -> SweepCurve:
    """
    对 config.method 的某个参数逐点运行 run_experiment

    Raises:
        ConfigError: 网格为空或方法没有该参数
    """
    if len(grid) == 0:
        raise ConfigError("扫描网格不能为空", field="--grid")
    if parameter not in config.method_params:
        raise ConfigError(f"方法 {config.method} 没有参数 {parameter}", field=f"methods.{config.method}")
    tables = []
    for value in grid:
        point = replace(config, method_params={**config.method_params, parameter: value})
        logger.info("sweep %s: %s=%s", config.method, parameter, value)
        tables.append(run_experiment(point, jobs=jobs))
    return SweepCurve(
        method=config.method,
        parameter=parameter,
        grid_values=tuple(grid),
        tables=tuple(tables),
    )


def bootstrap_sweep(config: ExperimentConfig, n_boot_grid: Sequence[int], jobs: int = 1) -> SweepCurve:
    """bootstrap 数扫描"""
    for value in n_boot_grid:
        if not isinstance(value, (int, np.integer)) or value < 1:
            raise ConfigError(f"n_boot 网格值必须是正整数: {value!r}", field="--grid")
    return parameter_sweep(config, "n_boot", [int(v) for v in n_boot_grid], jobs)


def split_size_sweep(config: ExperimentConfig, fraction_grid: Sequence[float], jobs: int = 1) -> SweepCurve:
    """split-conformal 训练比例扫描"""
    for value in fraction_grid:
        if not 0.0 < float(value) < 1.0:
            raise ConfigError(f"split_fraction 网格值必须在 (0, 1) 内: {value!r}", field="--grid")
    return parameter_sweep(config, "split_fraction", [float(v) for v in fraction_grid], jobs)
