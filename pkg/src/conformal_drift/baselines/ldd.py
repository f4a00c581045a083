"""
LDD-DIS 局部漂移度

对每个样本取 k 近邻（欧氏距离，不含自身），统计来自窗口 0 的 k1 个与
来自窗口 1 的 k2 个，局部漂移度为

    δ(x) = ((k2 + 1) / |W1|) / ((k1 + 1) / |W0|) - 1

原始分数为 |δ|。n_resample > 0 时，随机置换时间标签 n_resample 次得到 |δ|
的零分布（所有样本汇总），报告分数为零分布中小于观测值的比例。
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from ..core import AFTER, BEFORE, LabeledDataset, LocalizationResult, Orientation
from ..errors import ConfigError, DataError
from ..utils import make_rng


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LddParams:
    """
    LDD-DIS 参数

    Attributes:
        k: 近邻数，None 表示 min(20, n // 5)
        n_resample: 置换次数，0 表示直接输出原始 |δ|
        alpha: 仅用于诊断日志（统计分数超过 1 - alpha 的样本数），不影响输出分数
    """
    k: Optional[int] = None
    n_resample: int = 100
    alpha: float = 0.05

    def __post_init__(self):
        if self.k is not None and self.k < 1:
            raise ConfigError(f"k 必须 >= 1: {self.k}", field="k")
        if self.n_resample < 0:
            raise ConfigError(f"n_resample 必须非负: {self.n_resample}", field="n_resample")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha 必须在 (0, 1) 内: {self.alpha}", field="alpha")

    def resolve_k(self, n: int) -> int:
        k = self.k if self.k is not None else max(1, min(20, n // 5))
        if k >= n:
            raise ConfigError(f"k={k} 必须小于样本数 n={n}", field="k")
        return k


def neighbor_indices(X: np.ndarray, k: int) -> np.ndarray:
    """每个样本的 k 个最近邻下标（去掉自身）"""
    n = X.shape[0]
    _, nbr = cKDTree(X).query(X, k=k + 1)
    nbr = nbr.reshape(n, k + 1)
    is_self = nbr == np.arange(n)[:, None]
    # 存在重复点时自身可能不在结果里，去掉最远的一个
    is_self[~is_self.any(axis=1), -1] = True
    return nbr[~is_self].reshape(n, k)


def local_drift_degree(neighbors: np.ndarray, y: np.ndarray) -> np.ndarray:
    """平滑后的局部漂移度 δ"""
    n_before = float(np.sum(y == BEFORE))
    n_after = float(np.sum(y == AFTER))
    k2 = (y[neighbors] == AFTER).sum(axis=1)
    k1 = neighbors.shape[1] - k2
    return ((k2 + 1.0) / n_after) / ((k1 + 1.0) / n_before) - 1.0


def ldd_dis_localize(
    ds: LabeledDataset,
    params: Optional[LddParams] = None,
    rng_seed: int = 0,
) -> LocalizationResult:
    """
    LDD-DIS 漂移定位

    Args:
        ds: 两窗口数据集
        params: 近邻数与重采样次数
        rng_seed: 置换种子

    Returns:
        LocalizationResult（SCORE 方向）

    Raises:
        DataError: 数据集不是两窗口
        ConfigError: k >= n
    """
    params = params or LddParams()
    if ds.n_time_labels != 2:
        raise DataError(f"LDD-DIS 只支持两个窗口，实际 |T|={ds.n_time_labels}")
    k = params.resolve_k(ds.n_samples)
    neighbors = neighbor_indices(ds.X, k)
    observed = np.abs(local_drift_degree(neighbors, ds.y))
    if params.n_resample == 0:
        return LocalizationResult(values=observed, orientation=Orientation.SCORE)

    rng = make_rng(rng_seed)
    null = np.concatenate([
        np.abs(local_drift_degree(neighbors, rng.permutation(ds.y)))
        for _ in range(params.n_resample)
    ])
    null.sort()
    scores = np.searchsorted(null, observed, side="left") / null.shape[0]
    logger.debug(
        "ldd-dis: k=%d, %d of %d samples above the %.2f null quantile",
        k, int(np.sum(scores > 1.0 - params.alpha)), ds.n_samples, 1.0 - params.alpha,
    )
    return LocalizationResult(values=scores, orientation=Orientation.SCORE)
