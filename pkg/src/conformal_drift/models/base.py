"""
概率模型的公共接口

所有模型都是"按类别打分函数" f(c | x, θ)：对输入 x 给出时间标签上的分布。
conformal 校准只依赖 predict_proba，因此任何模型都可以接入；
leaf_id 仅对决策树有意义（MB-DL 基线按叶子分组）。
"""

from abc import ABC, abstractmethod
from enum import Enum

import numpy as np

from ..core import TimePrior
from ..errors import DataError, ModelKindError, NumericalError
from ..utils import PROBA_TOLERANCE


class ModelKind(str, Enum):
    """模型类型"""
    DECISION_TREE = "decision_tree"
    RANDOM_FOREST = "random_forest"
    MLP = "mlp"


class ProbabilisticModel(ABC):
    """
    训练好的概率分类器

    训练后不可变，可被并发地用于预测。
    """

    kind: ModelKind

    def __init__(self, n_time_labels: int, dimension: int):
        self.n_time_labels = int(n_time_labels)
        self.dimension = int(dimension)

    @abstractmethod
    def _predict_proba(self, X: np.ndarray) -> np.ndarray:
        """对已校验的 (m, d) 输入返回 (m, |T|) 概率矩阵"""

    def predict_proba_batch(self, X: np.ndarray) -> np.ndarray:
        """
        批量预测

        Args:
            X: (m, d) 特征矩阵

        Returns:
            (m, |T|) 概率矩阵，每行是合法分布

        Raises:
            DataError: 维度与训练维度不一致
            NumericalError: 输出出现非有限值
        """
        X = self.check_input(X)
        probs = self._predict_proba(X)
        if not np.all(np.isfinite(probs)):
            raise NumericalError(f"{self.kind.value} 预测出现非有限概率")
        return probs

    def predict_proba(self, x) -> TimePrior:
        """单个样本的预测分布"""
        probs = self.predict_proba_batch(np.asarray(x, dtype=np.float64).reshape(1, -1))[0]
        # TimePrior 要求 1e-12 容差，这里按 PROBA_TOLERANCE 校验后归一化
        if abs(probs.sum() - 1.0) > PROBA_TOLERANCE:
            raise NumericalError(f"预测分布之和偏离 1: {probs.sum()!r}")
        probs = probs / probs.sum()
        probs[-1] = max(0.0, 1.0 - probs[:-1].sum())
        return TimePrior(probs)

    def check_input(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X.reshape(1, -1)
        if X.ndim != 2 or X.shape[1] != self.dimension:
            raise DataError(
                f"输入维度 {X.shape[-1] if X.ndim else 0} 与训练维度 {self.dimension} 不一致"
            )
        return X


def predict_proba(model: ProbabilisticModel, x) -> TimePrior:
    """f(·|x, θ)：模型在 x 处的时间标签分布"""
    return model.predict_proba(x)


def leaf_id(model: ProbabilisticModel, x) -> int:
    """
    x 落入的叶子编号（仅决策树）

    Raises:
        ModelKindError: model 不是决策树
    """
    if model.kind is not ModelKind.DECISION_TREE:
        raise ModelKindError(f"leaf_id 只支持决策树，实际为 {model.kind.value}")
    return int(model.leaf_ids(np.asarray(x, dtype=np.float64).reshape(1, -1))[0])
