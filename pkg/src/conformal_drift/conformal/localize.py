"""
基于 bootstrap 校准的 conformal 漂移定位

流程（每个 bootstrap 相互独立，可并行）：
1. 在 in-bag 样本（含重复）上训练预测时间标签的模型
2. 用 OOB 样本按标签校准，给每个 in-bag 样本（去重）计算 min_c p_c
3. 汇总所有 bootstrap 后，对每个样本的 p-value 列表取中位数

从未进入 in-bag 的样本没有 p-value，在评估中被排除。

另提供 split-conformal 变体：一次随机划分，前一部分训练并被赋值，
其余部分只用于校准。
"""

import logging
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..core import DriftGroundTruth, LabeledDataset, LocalizationResult, Orientation
from ..errors import ConfigError, DataError
from ..models import ModelSpec, fit_model
from ..utils import derive_seed, make_rng, parallel_map
from .bootstrap import BootstrapSplit, sample_bootstraps, select_coverage_maximizing_bootstraps
from .pvalues import CalibrationSet, class_p_values, median_aggregate


logger = logging.getLogger(__name__)

# 派生子种子时的流编号
_SELECTION_STREAM = 0
_TRAINING_STREAM = 1

BOOTSTRAP_SELECTIONS = ("coverage", "plain")


@dataclass(frozen=True)
class CPConfig:
    """Bootstrap conformal 定位配置"""
    n_boot: int = 100
    model: ModelSpec = field(default_factory=ModelSpec)
    rng_seed: int = 0
    bootstrap_pool_factor: int = 10
    # coverage: 从 pool_factor × n_boot 个候选中贪心选择；plain: 直接抽 n_boot 个
    bootstrap_selection: str = "coverage"
    median_convention: str = "conservative"

    def __post_init__(self):
        if self.n_boot < 1:
            raise ConfigError(f"n_boot 必须 >= 1: {self.n_boot}", field="n_boot")
        if self.bootstrap_pool_factor < 1:
            raise ConfigError(
                f"bootstrap_pool_factor 必须 >= 1: {self.bootstrap_pool_factor}",
                field="bootstrap_pool_factor",
            )
        if self.bootstrap_selection not in BOOTSTRAP_SELECTIONS:
            raise ConfigError(
                f"bootstrap_selection 必须是 {BOOTSTRAP_SELECTIONS} 之一: {self.bootstrap_selection!r}",
                field="bootstrap_selection",
            )
        if self.median_convention not in ("conservative", "lower"):
            raise ConfigError(f"未知的中位数约定: {self.median_convention!r}", field="median_convention")


@dataclass(frozen=True)
class SplitCPConfig:
    """Split-conformal 定位配置"""
    split_fraction: float = 0.5
    model: ModelSpec = field(default_factory=ModelSpec)
    rng_seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.split_fraction < 1.0:
            raise ConfigError(f"split_fraction 必须在 (0, 1) 内: {self.split_fraction}", field="split_fraction")


@dataclass(frozen=True, eq=False)
class PValueTable:
    """
    每个样本的 p-value 列表及其聚合值

    Attributes:
        per_sample_lists: 第 i 项为样本 i 的 p-value 列表 P_i（可能为空）
        aggregated: 聚合后的 p_i；P_i 为空时为 NaN（缺失标记）
        n_boot: 参与的 bootstrap 数（split 变体为 1）
    """
    per_sample_lists: tuple[np.ndarray, ...]
    aggregated: np.ndarray
    n_boot: int = 1

    @classmethod
    def from_lists(cls, lists: list[list[float]], n_boot: int, convention: str = "conservative") -> "PValueTable":
        arrays = tuple(np.asarray(values, dtype=np.float64) for values in lists)
        aggregated = np.array(
            [median_aggregate(values, convention) if values.size else np.nan for values in arrays]
        )
        aggregated.setflags(write=False)
        return cls(per_sample_lists=arrays, aggregated=aggregated, n_boot=n_boot)

    def __len__(self) -> int:
        return len(self.per_sample_lists)

    @property
    def assigned(self) -> np.ndarray:
        return ~np.isnan(self.aggregated)

    @property
    def n_missing(self) -> int:
        return int((~self.assigned).sum())

    def assignment_counts(self) -> np.ndarray:
        """每个样本被赋值的次数 |P_i|"""
        return np.array([values.shape[0] for values in self.per_sample_lists], dtype=np.int64)

    def assignment_rate(self) -> np.ndarray:
        """每个样本被赋值的比例 |P_i| / n_boot"""
        return self.assignment_counts() / float(self.n_boot)

    def to_result(self, truth: Optional[DriftGroundTruth] = None) -> LocalizationResult:
        """转为 LocalizationResult（缺失样本取 1.0 并标记为未赋值）"""
        assigned = self.assigned
        values = np.where(assigned, self.aggregated, 1.0)
        return LocalizationResult(values=values, orientation=Orientation.P_VALUE, assigned=assigned, truth=truth)


@dataclass(frozen=True)
class _BootstrapTask:
    ds: LabeledDataset
    model: ModelSpec
    seed: int
    split: BootstrapSplit


def _run_bootstrap(task: _BootstrapTask) -> tuple[np.ndarray, np.ndarray, list[int]]:
    """训练一个 bootstrap 模型，返回 (去重 in-bag 下标, p-value, 空校准标签)"""
    ds, split = task.ds, task.split
    model = fit_model(task.model, ds.X[split.in_bag], ds.y[split.in_bag], ds.n_time_labels, task.seed)
    calibration = CalibrationSet.from_indices(ds, split.oob)
    present = np.bincount(calibration.y, minlength=ds.n_time_labels)
    empty_labels = [int(c) for c in np.flatnonzero(present == 0)]
    targets = split.unique_in_bag
    p_values = class_p_values(model, calibration, ds.X[targets]).min(axis=1)
    return targets, p_values, empty_labels


def draw_bootstraps(n: int, config: CPConfig) -> list[BootstrapSplit]:
    """按配置抽取（并选择）bootstrap 划分"""
    rng = make_rng(derive_seed(config.rng_seed, _SELECTION_STREAM))
    if config.bootstrap_selection == "plain":
        return sample_bootstraps(n, config.n_boot, rng)
    return select_coverage_maximizing_bootstraps(n, config.n_boot, config.bootstrap_pool_factor, rng)


def cp_drift_localization(ds: LabeledDataset, config: Optional[CPConfig] = None, jobs: int = 1) -> PValueTable:
    """
    Bootstrap conformal 漂移定位

    Args:
        ds: 数据集
        config: 定位配置
        jobs: 并行 worker 数（不影响结果）

    Returns:
        PValueTable
    """
    config = config or CPConfig()
    n = ds.n_samples
    started = time.perf_counter()
    splits = draw_bootstraps(n, config)
    tasks = [
        _BootstrapTask(ds, config.model, derive_seed(config.rng_seed, _TRAINING_STREAM, b), split)
        for b, split in enumerate(splits)
    ]
    outputs = parallel_map(_run_bootstrap, tasks, jobs)

    lists: list[list[float]] = [[] for _ in range(n)]
    for b, (targets, p_values, empty_labels) in enumerate(outputs):
        if empty_labels:
            logger.warning("bootstrap %d: labels %s have an empty calibration set (p_c = 1)", b, empty_labels)
        for i, p in zip(targets, p_values):
            lists[i].append(float(p))
        logger.debug("bootstrap %d: assigned %d samples", b, targets.shape[0])

    table = PValueTable.from_lists(lists, n_boot=len(splits), convention=config.median_convention)
    if table.n_missing:
        logger.warning("%d of %d samples were never in-bag and have no p-value", table.n_missing, n)
    logger.debug(
        "cp localization: n=%d n_boot=%d model=%s in %.2fs",
        n, len(splits), config.model.kind.value, time.perf_counter() - started,
    )
    return table


def split_conformal_localization(
    ds: LabeledDataset,
    split_fraction: Optional[float] = None,
    model: Optional[ModelSpec] = None,
    rng_seed: Optional[int] = None,
    config: Optional[SplitCPConfig] = None,
) -> PValueTable:
    """
    Split-conformal 漂移定位

    随机取 round(split_fraction × n) 个样本训练模型并赋值，其余样本用于校准。

    Args:
        ds: 数据集
        split_fraction: 训练部分比例，覆盖 config 中的值
        model: 模型配置，覆盖 config 中的值
        rng_seed: 种子，覆盖 config 中的值
        config: 完整配置

    Returns:
        PValueTable（校准部分的样本为缺失）

    Raises:
        DataError: 划分后某一部分为空
    """
    config = config or SplitCPConfig()
    fraction = config.split_fraction if split_fraction is None else split_fraction
    spec = config.model if model is None else model
    seed = config.rng_seed if rng_seed is None else rng_seed
    SplitCPConfig(split_fraction=fraction, model=spec, rng_seed=seed)

    n = ds.n_samples
    n_train = int(round(fraction * n))
    if n_train < 1 or n_train > n - 1:
        raise DataError(f"split_fraction={fraction} 在 n={n} 时产生空的训练集或校准集")

    order = make_rng(derive_seed(seed, _SELECTION_STREAM)).permutation(n)
    train, calib = np.sort(order[:n_train]), np.sort(order[n_train:])
    fitted = fit_model(spec, ds.X[train], ds.y[train], ds.n_time_labels, derive_seed(seed, _TRAINING_STREAM))
    p_values = class_p_values(fitted, CalibrationSet.from_indices(ds, calib), ds.X[train]).min(axis=1)

    lists: list[list[float]] = [[] for _ in range(n)]
    for i, p in zip(train, p_values):
        lists[i].append(float(p))
    return PValueTable.from_lists(lists, n_boot=1)
