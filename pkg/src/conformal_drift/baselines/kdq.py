"""
kdq-tree 局部检验

不看时间标签，按坐标轴轮换、在节点包围盒中点处递归切分特征空间。
每个叶子的统计量为叶内 Laplace 平滑时间标签分布与全局先验之间的
KL 散度，叶内所有样本共享该分数。
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import rel_entr

from ..core import LabeledDataset, LocalizationResult, Orientation, time_label_prior
from ..errors import ConfigError


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class KdqParams:
    min_leaf_size: int = 10
    max_depth: int = 20

    def __post_init__(self):
        if self.min_leaf_size < 1:
            raise ConfigError(f"min_leaf_size 必须 >= 1: {self.min_leaf_size}", field="min_leaf_size")
        if self.max_depth < 0:
            raise ConfigError(f"max_depth 必须非负: {self.max_depth}", field="max_depth")


def kdq_partition(X: np.ndarray, params: KdqParams) -> np.ndarray:
    """
    kdq-tree 划分

    Returns:
        (n,) 每个样本所在叶子的编号（深度优先、先左后右）
    """
    X = np.asarray(X, dtype=np.float64)
    n, d = X.shape
    leaves = np.empty(n, dtype=np.int64)
    next_leaf = 0

    def split(idx: np.ndarray, lo: np.ndarray, hi: np.ndarray, depth: int) -> None:
        nonlocal next_leaf
        if idx.size <= params.min_leaf_size or depth >= params.max_depth:
            leaves[idx] = next_leaf
            next_leaf += 1
            return
        axis = depth % d
        mid = (lo[axis] + hi[axis]) / 2.0
        go_left = X[idx, axis] <= mid
        left_hi, right_lo = hi.copy(), lo.copy()
        left_hi[axis] = mid
        right_lo[axis] = mid
        split(idx[go_left], lo, left_hi, depth + 1)
        split(idx[~go_left], right_lo, hi, depth + 1)

    split(np.arange(n), X.min(axis=0), X.max(axis=0), 0)
    return leaves


def kdq_tree_localize(ds: LabeledDataset, params: KdqParams | None = None) -> LocalizationResult:
    """
    kdq-tree 漂移定位

    Args:
        ds: 数据集
        params: 树参数

    Returns:
        LocalizationResult（SCORE 方向，越大越漂移）
    """
    params = params or KdqParams()
    leaves = kdq_partition(ds.X, params)
    n_leaves = int(leaves.max()) + 1
    prior = time_label_prior(ds).probs
    counts = np.zeros((n_leaves, ds.n_time_labels))
    np.add.at(counts, (leaves, ds.y), 1.0)
    smoothed = (counts + 1.0) / (counts.sum(axis=1, keepdims=True) + ds.n_time_labels)
    kl = rel_entr(smoothed, prior[None, :]).sum(axis=1)
    logger.debug("kdq-tree: %d leaves, max KL %.4g", n_leaves, float(kl.max()))
    return LocalizationResult(values=kl[leaves], orientation=Orientation.SCORE)
