"""
核心数据模型

两窗口（一般为有限时间标签）数据流的数据模型：
- Sample: 单个样本 (X_i, T_i)
- LabeledDataset: 有序样本集合，索引 i 在一次运行中始终标识同一样本
- DriftGroundTruth: 每个样本是否属于漂移区域
- TimePrior: 时间标签上的分布（经验先验或模型预测）
- LocalizationResult: 定位方法的输出（分数/p-value + 是否被赋值）

所有数组在构造后设为只读，可在并发读取者之间安全共享。

注意：方法推导基于"时间分布均匀"的假设；|T| > 2 且先验不均匀时
没有理论保证，只作为可用但未验证的配置。
"""

from collections.abc import Sequence
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .errors import DataError
from .utils import PRIOR_TOLERANCE


BEFORE = 0
AFTER = 1


def _readonly(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Sample:
    """单个样本：特征向量 + 时间标签"""
    features: np.ndarray
    time_label: int

    def __post_init__(self):
        features = np.asarray(self.features, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(features)):
            raise DataError("特征中包含 NaN 或 inf")
        if self.time_label < 0:
            raise DataError(f"时间标签必须非负: {self.time_label}")
        object.__setattr__(self, "features", _readonly(features))
        object.__setattr__(self, "time_label", int(self.time_label))


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """
    带时间标签的数据集

    内部以矩阵形式存储（X: n×d float64，y: n int64），
    samples 属性按需构造 Sample 列表。

    不变量：
        - 所有样本维度相同
        - {0, ..., n_time_labels-1} 中每个标签至少出现一次
        - 特征无 NaN/inf
    """
    X: np.ndarray
    y: np.ndarray
    n_time_labels: int = 2

    def __post_init__(self):
        X = np.array(self.X, dtype=np.float64, copy=True)
        y = np.array(self.y, copy=True)
        if X.ndim != 2:
            raise DataError(f"特征矩阵必须是二维的，实际维度 {X.ndim}")
        if X.shape[0] == 0:
            raise DataError("数据集为空")
        if y.shape != (X.shape[0],):
            raise DataError(f"标签数 {y.shape} 与样本数 {X.shape[0]} 不一致")
        if not np.all(np.isfinite(X)):
            raise DataError("特征中包含 NaN 或 inf")
        if y.dtype.kind not in "iu":
            if not np.all(np.equal(np.mod(y, 1), 0)):
                raise DataError("时间标签必须是整数")
        y = y.astype(np.int64)
        if self.n_time_labels < 1:
            raise DataError(f"n_time_labels 必须为正: {self.n_time_labels}")
        if y.min() < 0 or y.max() >= self.n_time_labels:
            raise DataError(
                f"时间标签超出范围 [0, {self.n_time_labels - 1}]: "
                f"min={int(y.min())}, max={int(y.max())}"
            )
        counts = np.bincount(y, minlength=self.n_time_labels)
        missing = [int(c) for c in np.flatnonzero(counts == 0)]
        if missing:
            raise DataError(f"时间标签 {missing} 没有出现在数据集中")
        object.__setattr__(self, "X", _readonly(X))
        object.__setattr__(self, "y", _readonly(y))

    @classmethod
    def from_samples(cls, samples: Sequence[Sample], n_time_labels: int = 2) -> "LabeledDataset":
        """由 Sample 列表构造（保持顺序）"""
        if not samples:
            raise DataError("数据集为空")
        dims = {s.features.shape[0] for s in samples}
        if len(dims) != 1:
            raise DataError(f"样本维度不一致: {sorted(dims)}")
        X = np.vstack([s.features for s in samples])
        y = np.array([s.time_label for s in samples], dtype=np.int64)
        return cls(X=X, y=y, n_time_labels=n_time_labels)

    @property
    def n_samples(self) -> int:
        return int(self.X.shape[0])

    @property
    def dimension(self) -> int:
        return int(self.X.shape[1])

    @property
    def samples(self) -> list[Sample]:
        return [Sample(self.X[i], int(self.y[i])) for i in range(self.n_samples)]

    def __len__(self) -> int:
        return self.n_samples

    def label_counts(self) -> np.ndarray:
        """每个时间标签的样本数"""
        return np.bincount(self.y, minlength=self.n_time_labels)

    def with_labels(self, y: np.ndarray) -> "LabeledDataset":
        """替换时间标签（用于置换检验、标签互换对称性检查）"""
        return LabeledDataset(X=self.X, y=np.asarray(y), n_time_labels=self.n_time_labels)


@dataclass(frozen=True, eq=False)
class DriftGroundTruth:
    """每个样本是否位于漂移区域 L 中"""
    is_drifting: np.ndarray

    def __post_init__(self):
        flags = np.asarray(self.is_drifting).reshape(-1)
        if flags.dtype != np.bool_:
            if not np.all(np.isin(flags, (0, 1))):
                raise DataError("漂移真值只能是 0/1 或布尔值")
            flags = flags.astype(bool)
        object.__setattr__(self, "is_drifting", _readonly(np.array(flags, copy=True)))

    def __len__(self) -> int:
        return int(self.is_drifting.shape[0])

    @property
    def n_drifting(self) -> int:
        return int(self.is_drifting.sum())

    def check_matches(self, ds: LabeledDataset) -> None:
        """校验长度与数据集一致"""
        if len(self) != ds.n_samples:
            raise DataError(f"真值长度 {len(self)} 与数据集大小 {ds.n_samples} 不一致")


@dataclass(frozen=True, eq=False)
class TimePrior:
    """时间标签上的概率分布"""
    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64).reshape(-1)
        if probs.size == 0:
            raise DataError("分布不能为空")
        if np.any(probs < 0.0) or np.any(probs > 1.0):
            raise DataError(f"分布的每一项必须在 [0, 1] 内: {probs}")
        if abs(probs.sum() - 1.0) > PRIOR_TOLERANCE:
            raise DataError(f"分布之和必须为 1（±{PRIOR_TOLERANCE}），实际 {probs.sum()!r}")
        object.__setattr__(self, "probs", _readonly(np.array(probs, copy=True)))

    def __len__(self) -> int:
        return int(self.probs.shape[0])

    def __getitem__(self, label: int) -> float:
        return float(self.probs[label])


class Orientation(str, Enum):
    """分数方向"""
    P_VALUE = "p_value"  # 越小越漂移
    SCORE = "score"      # 越大越漂移


@dataclass(frozen=True, eq=False)
class LocalizationResult:
    """
    定位方法的输出

    Attributes:
        values: 每个样本的 p-value 或漂移分数
        orientation: values 的方向
        assigned: 是否被赋值（False 的样本在评估中被排除）
        truth: 可选的漂移真值
    """
    values: np.ndarray
    orientation: Orientation
    assigned: np.ndarray = field(default=None)
    truth: Optional[DriftGroundTruth] = None

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, copy=True).reshape(-1)
        if self.assigned is None:
            assigned = np.ones(values.shape[0], dtype=bool)
        else:
            assigned = np.array(self.assigned, dtype=bool, copy=True).reshape(-1)
        if assigned.shape != values.shape:
            raise DataError("assigned 与 values 长度不一致")
        if not np.all(np.isfinite(values)):
            raise DataError("定位结果中包含非有限值")
        if self.truth is not None and len(self.truth) != values.shape[0]:
            raise DataError("真值长度与结果长度不一致")
        object.__setattr__(self, "values", _readonly(values))
        object.__setattr__(self, "assigned", _readonly(assigned))
        object.__setattr__(self, "orientation", Orientation(self.orientation))

    def __len__(self) -> int:
        return int(self.values.shape[0])

    @property
    def n_assigned(self) -> int:
        return int(self.assigned.sum())

    def drift_scores(self) -> np.ndarray:
        """统一为"越大越漂移"的分数（p-value 取负，与 1-p 等价且精确）"""
        if self.orientation is Orientation.P_VALUE:
            return -self.values
        return self.values.copy()


def make_window_pair(before: Sequence[Sequence[float]], after: Sequence[Sequence[float]]) -> LabeledDataset:
    """
    由前后两个窗口构造数据集

    before 窗口样本标签为 0，after 窗口样本标签为 1，顺序为先 before 后 after。

    Args:
        before: 漂移前窗口的特征向量列表
        after: 漂移后窗口的特征向量列表

    Returns:
        LabeledDataset（n_time_labels = 2）

    Raises:
        DataError: 窗口为空或维度不一致
    """
    before_arr = [np.asarray(v, dtype=np.float64).reshape(-1) for v in before]
    after_arr = [np.asarray(v, dtype=np.float64).reshape(-1) for v in after]
    if not before_arr:
        raise DataError("before 窗口为空")
    if not after_arr:
        raise DataError("after 窗口为空")
    dims = {v.shape[0] for v in before_arr + after_arr}
    if len(dims) != 1:
        raise DataError(f"维度不一致: {sorted(dims)}")
    X = np.vstack(before_arr + after_arr)
    y = np.concatenate([
        np.full(len(before_arr), BEFORE, dtype=np.int64),
        np.full(len(after_arr), AFTER, dtype=np.int64),
    ])
    return LabeledDataset(X=X, y=y, n_time_labels=2)


def time_label_prior(ds: LabeledDataset) -> TimePrior:
    """
    经验时间先验 P̂_T

    probs[c] = count(label = c) / n
    """
    counts = ds.label_counts().astype(np.float64)
    probs = counts / counts.sum()
    # 消除舍入误差，使和严格落在容差内
    probs[-1] = 1.0 - probs[:-1].sum()
    return TimePrior(probs)
