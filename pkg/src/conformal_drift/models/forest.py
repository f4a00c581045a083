"""
随机森林（预测时间标签）

每棵树 i 使用从主种子派生的 tree_seed = derive_seed(seed, i)：
bootstrap 由 default_rng(tree_seed) 抽取，树本身也用 tree_seed 训练。
因此结果与树的训练顺序和并行度无关。
"""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from ..core import LabeledDataset, TimePrior
from ..errors import ConfigError, DataError
from ..utils import derive_seed, parallel_map
from .base import ModelKind, ProbabilisticModel
from .tree import DecisionTreeModel, TreeParams, fit_decision_tree


logger = logging.getLogger(__name__)

FeatureSubsample = Union[str, int]


@dataclass(frozen=True)
class ForestParams:
    """随机森林超参数"""
    n_trees: int = 100
    max_depth: int = 8
    min_leaf_size: int = 2
    # "sqrt"（默认）、"all"，或每次切分考虑的特征数
    feature_subsample: FeatureSubsample = "sqrt"

    def __post_init__(self):
        if self.n_trees < 1:
            raise ConfigError(f"n_trees 必须 >= 1: {self.n_trees}", field="n_trees")
        if isinstance(self.feature_subsample, str):
            if self.feature_subsample not in ("sqrt", "all"):
                raise ConfigError(
                    f"feature_subsample 必须是 sqrt、all 或正整数: {self.feature_subsample!r}",
                    field="feature_subsample",
                )
        elif int(self.feature_subsample) < 1:
            raise ConfigError(f"feature_subsample 必须 >= 1: {self.feature_subsample}", field="feature_subsample")
        # 借用 TreeParams 的校验
        TreeParams(max_depth=self.max_depth, min_leaf_size=self.min_leaf_size)

    def max_features(self, dimension: int) -> Optional[int]:
        if self.feature_subsample == "all":
            return None
        if self.feature_subsample == "sqrt":
            return max(1, int(math.sqrt(dimension)))
        return min(int(self.feature_subsample), dimension)

    def tree_params(self, dimension: int) -> TreeParams:
        return TreeParams(
            max_depth=self.max_depth,
            min_leaf_size=self.min_leaf_size,
            max_features=self.max_features(dimension),
        )


@dataclass(frozen=True)
class _TreeTask:
    X: np.ndarray
    y: np.ndarray
    n_time_labels: int
    params: TreeParams
    seed: int
    bootstrap: np.ndarray


def _fit_tree(task: _TreeTask) -> DecisionTreeModel:
    return fit_decision_tree(
        task.X[task.bootstrap], task.y[task.bootstrap], task.n_time_labels, task.params, task.seed
    )


class RandomForestModel(ProbabilisticModel):
    """
    训练好的随机森林

    Attributes:
        trees: 各棵决策树
        tree_seeds: 每棵树的派生种子
        bootstraps: 每棵树的 bootstrap 下标（含重复）
        oob_masks: (n_trees, n) 布尔矩阵，True 表示样本不在该树的 bootstrap 中
    """

    kind = ModelKind.RANDOM_FOREST

    def __init__(
        self,
        trees: list[DecisionTreeModel],
        tree_seeds: list[int],
        bootstraps: list[np.ndarray],
        X_train: np.ndarray,
        n_time_labels: int,
    ):
        super().__init__(n_time_labels, X_train.shape[1])
        self.trees = trees
        self.tree_seeds = tree_seeds
        self.bootstraps = bootstraps
        self._X_train = X_train
        n = X_train.shape[0]
        masks = np.ones((len(trees), n), dtype=bool)
        for t, boot in enumerate(bootstraps):
            masks[t, boot] = False
        masks.setflags(write=False)
        self.oob_masks = masks

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    def _predict_proba(self, X: np.ndarray) -> np.ndarray:
        total = np.zeros((X.shape[0], self.n_time_labels))
        for tree in self.trees:
            total += tree.predict_proba_batch(X)
        return total / self.n_trees

    def oob_predict_proba(self, fallback: Optional[TimePrior] = None) -> tuple[np.ndarray, np.ndarray]:
        """
        训练样本的 OOB 预测

        每个样本取所有未抽到它的树的平均预测分布。

        Args:
            fallback: 没有 OOB 树的样本用该分布代替；为 None 时保留 NaN

        Returns:
            (probs, has_oob)：(n, |T|) 概率矩阵与 (n,) 布尔标记
        """
        n = self._X_train.shape[0]
        total = np.zeros((n, self.n_time_labels))
        for tree, mask in zip(self.trees, self.oob_masks):
            if mask.any():
                total[mask] += tree.predict_proba_batch(self._X_train[mask])
        counts = self.oob_masks.sum(axis=0)
        has_oob = counts > 0
        probs = np.full((n, self.n_time_labels), np.nan)
        probs[has_oob] = total[has_oob] / counts[has_oob, None]
        if fallback is not None:
            probs[~has_oob] = fallback.probs
        n_missing = int((~has_oob).sum())
        if n_missing:
            logger.debug("%d of %d samples have no OOB tree", n_missing, n)
        return probs, has_oob


def fit_random_forest(
    X: np.ndarray,
    y: np.ndarray,
    n_time_labels: int,
    params: Optional[ForestParams] = None,
    seed: int = 0,
    bootstraps: Optional[Sequence[np.ndarray]] = None,
    jobs: int = 1,
) -> RandomForestModel:
    """
    在原始数组上训练随机森林

    Args:
        X: (n, d) 特征矩阵
        y: (n,) 时间标签
        n_time_labels: |T|
        params: 超参数
        seed: 主种子
        bootstraps: 显式指定每棵树的 bootstrap 下标（长度须等于 n_trees）
        jobs: 并行训练的 worker 数

    Returns:
        RandomForestModel
    """
    params = params or ForestParams()
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    n, d = X.shape
    tree_seeds = [derive_seed(seed, i) for i in range(params.n_trees)]
    if bootstraps is None:
        bootstraps = [np.random.default_rng(s).integers(0, n, size=n) for s in tree_seeds]
    else:
        bootstraps = [np.asarray(b, dtype=np.int64) for b in bootstraps]
        if len(bootstraps) != params.n_trees:
            raise DataError(f"bootstraps 数量 {len(bootstraps)} 与 n_trees={params.n_trees} 不一致")
    tree_params = params.tree_params(d)
    tasks = [
        _TreeTask(X, y, n_time_labels, tree_params, s, b)
        for s, b in zip(tree_seeds, bootstraps)
    ]
    trees = parallel_map(_fit_tree, tasks, jobs)
    logger.debug("trained random forest: n=%d trees=%d", n, len(trees))
    return RandomForestModel(trees, tree_seeds, list(bootstraps), X, n_time_labels)


def train_random_forest(
    ds: LabeledDataset,
    params: Optional[ForestParams] = None,
    rng_seed: int = 0,
) -> RandomForestModel:
    """在数据集上训练随机森林（预测时间标签）"""
    return fit_random_forest(ds.X, ds.y, ds.n_time_labels, params, rng_seed)
