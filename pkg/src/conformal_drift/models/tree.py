"""
CART 决策树（Gini 不纯度，预测时间标签）

- 候选切分点：排序去重后相邻特征值的中点
- 叶子存储 Laplace 平滑分布 (count_c + 1) / (n_leaf + |T|)，
  避免零概率导致 conformal 分数大量并列
- 种子只用于打破完全并列的切分（以及随机森林中的特征子采样），
  因此固定种子时训练结果与样本顺序无关
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..core import LabeledDataset, TimePrior
from ..errors import ConfigError
from .base import ModelKind, ProbabilisticModel


logger = logging.getLogger(__name__)

# 不纯度比较的绝对容差（加权 Gini 的量级是 n）
_TIE_TOLERANCE = 1e-9


@dataclass(frozen=True)
class TreeParams:
    """决策树超参数"""
    max_depth: int = 5
    min_leaf_size: int = 5
    # None 表示每次切分考虑全部特征；随机森林传入 √d
    max_features: Optional[int] = None

    def __post_init__(self):
        if self.max_depth < 0:
            raise ConfigError(f"max_depth 必须非负: {self.max_depth}", field="max_depth")
        if self.min_leaf_size < 1:
            raise ConfigError(f"min_leaf_size 必须 >= 1: {self.min_leaf_size}", field="min_leaf_size")
        if self.max_features is not None and self.max_features < 1:
            raise ConfigError(f"max_features 必须 >= 1: {self.max_features}", field="max_features")


@dataclass(frozen=True, eq=False)
class TreeNode:
    """
    树节点

    内部节点：split_feature / split_threshold / left / right（x[f] <= 阈值走左边）
    叶子节点：leaf_distribution / leaf_id
    """
    split_feature: Optional[int] = None
    split_threshold: Optional[float] = None
    left: Optional["TreeNode"] = None
    right: Optional["TreeNode"] = None
    leaf_distribution: Optional[TimePrior] = None
    leaf_id: Optional[int] = None

    @property
    def is_leaf(self) -> bool:
        return self.leaf_distribution is not None

    @property
    def children(self) -> tuple["TreeNode", "TreeNode"]:
        return (self.left, self.right)


def _smoothed(counts: np.ndarray) -> np.ndarray:
    return (counts + 1.0) / (counts.sum() + counts.shape[0])


def _weighted_gini(counts: np.ndarray, totals: np.ndarray) -> np.ndarray:
    """n * Gini，按行计算"""
    totals = totals.astype(np.float64)
    return totals - (counts.astype(np.float64) ** 2).sum(axis=-1) / totals


def _best_split(
    X: np.ndarray,
    y: np.ndarray,
    n_labels: int,
    min_leaf_size: int,
    features: np.ndarray,
    rng: np.random.Generator,
) -> Optional[tuple[int, float]]:
    """
    在给定特征上搜索最优 Gini 切分

    Returns:
        (特征, 阈值)，没有可改进的合法切分时返回 None
    """
    n = y.shape[0]
    parent_counts = np.bincount(y, minlength=n_labels)
    parent_impurity = float(_weighted_gini(parent_counts[None, :], np.array([n]))[0])

    impurities = []
    candidates: list[tuple[int, float]] = []
    onehot = np.zeros((n, n_labels))
    for f in features:
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        onehot[:] = 0.0
        onehot[np.arange(n), y[order]] = 1.0
        cum = np.cumsum(onehot, axis=0)

        pos = np.flatnonzero(xs[:-1] < xs[1:])
        n_left = pos + 1
        pos = pos[(n_left >= min_leaf_size) & (n - n_left >= min_leaf_size)]
        if pos.size == 0:
            continue
        n_left = pos + 1
        left = cum[pos]
        right = parent_counts[None, :] - left
        impurity = _weighted_gini(left, n_left) + _weighted_gini(right, n - n_left)

        thresholds = (xs[pos] + xs[pos + 1]) / 2.0
        # 相邻浮点数的中点可能舍入到右端点
        thresholds = np.where(thresholds >= xs[pos + 1], xs[pos], thresholds)
        impurities.append(impurity)
        candidates.extend((int(f), float(t)) for t in thresholds)

    if not candidates:
        return None
    impurity = np.concatenate(impurities)
    best = impurity.min()
    if best >= parent_impurity - _TIE_TOLERANCE:
        return None
    ties = np.flatnonzero(impurity <= best + _TIE_TOLERANCE)
    choice = ties[0] if ties.size == 1 else ties[rng.integers(ties.size)]
    return candidates[int(choice)]


class _TreeBuilder:
    """递归构建 TreeNode，叶子按深度优先、先左后右的顺序编号"""

    def __init__(self, X: np.ndarray, y: np.ndarray, n_labels: int, params: TreeParams, seed: int):
        self.X = X
        self.y = y
        self.n_labels = n_labels
        self.params = params
        self.rng = np.random.default_rng(seed)
        self.n_leaves = 0

    def _leaf(self, idx: np.ndarray) -> TreeNode:
        counts = np.bincount(self.y[idx], minlength=self.n_labels)
        dist = _smoothed(counts)
        dist[-1] = 1.0 - dist[:-1].sum()
        node = TreeNode(leaf_distribution=TimePrior(dist), leaf_id=self.n_leaves)
        self.n_leaves += 1
        return node

    def _features(self) -> np.ndarray:
        d = self.X.shape[1]
        k = self.params.max_features
        if k is None or k >= d:
            return np.arange(d)
        return np.sort(self.rng.choice(d, size=k, replace=False))

    def grow(self, idx: np.ndarray, depth: int) -> TreeNode:
        y_node = self.y[idx]
        if (
            depth >= self.params.max_depth
            or idx.size < 2 * self.params.min_leaf_size
            or np.all(y_node == y_node[0])
        ):
            return self._leaf(idx)

        split = _best_split(
            self.X[idx], y_node, self.n_labels, self.params.min_leaf_size, self._features(), self.rng
        )
        if split is None:
            return self._leaf(idx)

        feature, threshold = split
        go_left = self.X[idx, feature] <= threshold
        left = self.grow(idx[go_left], depth + 1)
        right = self.grow(idx[~go_left], depth + 1)
        return TreeNode(split_feature=feature, split_threshold=threshold, left=left, right=right)


class DecisionTreeModel(ProbabilisticModel):
    """
    训练好的决策树

    除 TreeNode 结构外，还把树展平为数组以便向量化预测。
    """

    kind = ModelKind.DECISION_TREE

    def __init__(self, root: TreeNode, n_time_labels: int, dimension: int, n_leaves: int):
        super().__init__(n_time_labels, dimension)
        self.root = root
        self.n_leaves = n_leaves
        self._flatten()

    def _flatten(self) -> None:
        feature, threshold, left, right, values, leaf_ids = [], [], [], [], [], []

        def visit(node: TreeNode) -> int:
            index = len(feature)
            feature.append(-1)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
            values.append(None)
            leaf_ids.append(-1)
            if node.is_leaf:
                values[index] = node.leaf_distribution.probs
                leaf_ids[index] = node.leaf_id
            else:
                feature[index] = node.split_feature
                threshold[index] = node.split_threshold
                left[index] = visit(node.left)
                right[index] = visit(node.right)
            return index

        visit(self.root)
        uniform = np.full(self.n_time_labels, 1.0 / self.n_time_labels)
        self._feature = np.array(feature, dtype=np.int64)
        self._threshold = np.array(threshold, dtype=np.float64)
        self._left = np.array(left, dtype=np.int64)
        self._right = np.array(right, dtype=np.int64)
        self._values = np.vstack([v if v is not None else uniform for v in values])
        self._leaf_ids = np.array(leaf_ids, dtype=np.int64)

    def _apply(self, X: np.ndarray) -> np.ndarray:
        """每个输入落入的节点下标"""
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = np.flatnonzero(self._feature[node] >= 0)
        while active.size:
            current = node[active]
            f = self._feature[current]
            go_left = X[active, f] <= self._threshold[current]
            node[active] = np.where(go_left, self._left[current], self._right[current])
            active = active[self._feature[node[active]] >= 0]
        return node

    def _predict_proba(self, X: np.ndarray) -> np.ndarray:
        return self._values[self._apply(X)]

    def leaf_ids(self, X) -> np.ndarray:
        """批量返回叶子编号"""
        return self._leaf_ids[self._apply(self.check_input(X))]

    @property
    def depth(self) -> int:
        def walk(node: TreeNode) -> int:
            return 0 if node.is_leaf else 1 + max(walk(node.left), walk(node.right))
        return walk(self.root)


def fit_decision_tree(
    X: np.ndarray,
    y: np.ndarray,
    n_time_labels: int,
    params: Optional[TreeParams] = None,
    seed: int = 0,
) -> DecisionTreeModel:
    """
    在原始数组上训练决策树

    X 中允许重复行（bootstrap 的 in-bag 多重集按多重性加权）；
    y 不要求覆盖全部标签。

    Args:
        X: (n, d) 特征矩阵
        y: (n,) 时间标签
        n_time_labels: |T|
        params: 超参数
        seed: 打破并列（及特征子采样）的种子

    Returns:
        DecisionTreeModel
    """
    params = params or TreeParams()
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    builder = _TreeBuilder(X, y, n_time_labels, params, seed)
    root = builder.grow(np.arange(y.shape[0]), depth=0)
    model = DecisionTreeModel(root, n_time_labels, X.shape[1], builder.n_leaves)
    logger.debug("trained decision tree: n=%d leaves=%d depth=%d", y.shape[0], model.n_leaves, model.depth)
    return model


def train_decision_tree(
    ds: LabeledDataset,
    params: Optional[TreeParams] = None,
    rng_seed: int = 0,
) -> DecisionTreeModel:
    """在数据集上训练 CART 决策树（预测时间标签）"""
    return fit_decision_tree(ds.X, ds.y, ds.n_time_labels, params, rng_seed)
