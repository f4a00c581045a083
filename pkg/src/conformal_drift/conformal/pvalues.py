"""
Conformal p-value 计算

打分函数取模型对标签 c 的预测概率 f(c|x, θ)。对每个标签 c，
校准分数为校准集中标签为 c 的样本的 f(c|x_k, θ)，

    p_c(x) = (1 + #{k : f(c|x_k) <= f(c|x)}) / (1 + #{k})

校准集为空时 p_c = 1。x 的漂移 p-value 为 min_c p_c（不做 Bonferroni 校正）。
"""

from collections.abc import Sequence
from dataclasses import dataclass
from typing import Union

import numpy as np

from ..core import LabeledDataset
from ..errors import ConfigError, DataError
from ..models import ProbabilisticModel
from ..utils import as_float_array, clamp_probability


MEDIAN_CONVENTIONS = ("conservative", "lower")


@dataclass(frozen=True, eq=False)
class CalibrationSet:
    """
    校准样本（通常是一个 bootstrap 的 OOB 样本）

    与 LabeledDataset 不同，可以为空，也不要求每个标签都出现。
    """
    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.int64).reshape(-1)
        if X.ndim != 2 or X.shape[0] != y.shape[0]:
            raise DataError(f"校准集形状不一致: X{X.shape}, y{y.shape}")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @classmethod
    def from_indices(cls, ds: LabeledDataset, indices: np.ndarray) -> "CalibrationSet":
        return cls(X=ds.X[indices], y=ds.y[indices])

    def __len__(self) -> int:
        return int(self.y.shape[0])


CalibrationLike = Union[CalibrationSet, LabeledDataset]


def conformal_p_values(calibration_scores: Sequence[float] | np.ndarray, test_scores) -> np.ndarray:
    """
    向量化的 conformal p-value

    Args:
        calibration_scores: 校准分数
        test_scores: 测试分数（标量或数组）

    Returns:
        与 test_scores 同形状的 p-value
    """
    cal = np.sort(as_float_array(calibration_scores))
    tests = np.asarray(test_scores, dtype=np.float64)
    if not (np.all(np.isfinite(cal)) and np.all(np.isfinite(tests))):
        raise DataError("conformal 分数必须是有限值")
    counts = np.searchsorted(cal, tests, side="right")
    return clamp_probability((1.0 + counts) / (1.0 + cal.shape[0]))


def conformal_p_value(calibration_scores: Sequence[float], test_score: float) -> float:
    """
    (1 + #{cal <= test}) / (1 + #cal)

    Examples:
        >>> conformal_p_value([], 0.3)
        1.0
        >>> conformal_p_value([0.2, 0.5, 0.9], 0.1)
        0.25
    """
    return float(conformal_p_values(calibration_scores, test_score))


def class_p_values(model: ProbabilisticModel, calibration: CalibrationLike, X) -> np.ndarray:
    """
    每个查询点对每个时间标签的 conformal p-value

    Args:
        model: 训练好的模型
        calibration: 校准样本
        X: (m, d) 查询点

    Returns:
        (m, |T|) 矩阵，第 c 列为 p_c
    """
    X = model.check_input(X)
    n_labels = model.n_time_labels
    test_probs = model.predict_proba_batch(X)
    p_values = np.ones((X.shape[0], n_labels))
    if len(calibration) == 0:
        return p_values
    cal_probs = model.predict_proba_batch(calibration.X)
    for c in range(n_labels):
        scores = cal_probs[calibration.y == c, c]
        if scores.size:
            p_values[:, c] = conformal_p_values(scores, test_probs[:, c])
    return p_values


def min_class_p_value(model: ProbabilisticModel, oob_samples: CalibrationLike, x) -> float:
    """p_drifting(x) = min_c p_c(x)"""
    return float(class_p_values(model, oob_samples, np.asarray(x, dtype=np.float64).reshape(1, -1))[0].min())


def prediction_set(p_values: Sequence[float] | np.ndarray, alpha: float) -> frozenset[int]:
    """Conformal 预测集 F_α(x) = {c : p_c(x) >= α}"""
    p = as_float_array(p_values)
    return frozenset(int(c) for c in np.flatnonzero(p >= alpha))


def rejects_non_drifting(p_values: Sequence[float] | np.ndarray, alpha: float) -> bool:
    """预测集不是全部标签时拒绝"x 不漂移"，即 min_c p_c < α"""
    return bool(as_float_array(p_values).min() < alpha)


def median_aggregate(values: Sequence[float] | np.ndarray, convention: str = "conservative") -> float:
    """
    p-value 列表的中位数

    奇数长度取中间值。偶数长度下，conservative 取两个中间值中较大者，
    使得 "结果 < α 当且仅当严格多数的元素 < α" 精确成立；
    lower 取较小者。

    Args:
        values: 非空 p-value 列表
        convention: "conservative" 或 "lower"

    Raises:
        DataError: 列表为空
    """
    if convention not in MEDIAN_CONVENTIONS:
        raise ConfigError(f"未知的中位数约定: {convention!r}", field="convention")
    ordered = np.sort(as_float_array(values))
    n = ordered.shape[0]
    if n == 0:
        raise DataError("不能对空列表取中位数")
    if n % 2 == 1 or convention == "conservative":
        return float(ordered[n // 2])
    return float(ordered[n // 2 - 1])
