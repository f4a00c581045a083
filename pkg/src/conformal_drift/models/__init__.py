"""
模型模块

从零实现的时间标签分类器（决策树、随机森林、MLP），
以及按 ModelSpec 创建模型的工厂函数。
"""

from collections.abc import Mapping
from dataclasses import dataclass, field, fields
from typing import Any, Optional, Union

import numpy as np

from ..config import build_params
from ..core import LabeledDataset
from ..errors import ConfigError
from .base import ModelKind, ProbabilisticModel, leaf_id, predict_proba
from .forest import ForestParams, RandomForestModel, fit_random_forest, train_random_forest
from .mlp import MLPModel, MLPParams, fit_mlp, mlp_loss_and_gradients, train_mlp
from .tree import DecisionTreeModel, TreeNode, TreeParams, fit_decision_tree, train_decision_tree


ModelParams = Union[TreeParams, ForestParams, MLPParams]

_PARAMS_BY_KIND: dict[ModelKind, type] = {
    ModelKind.DECISION_TREE: TreeParams,
    ModelKind.RANDOM_FOREST: ForestParams,
    ModelKind.MLP: MLPParams,
}


@dataclass(frozen=True)
class ModelSpec:
    """模型类型 + 该类型的超参数"""
    kind: ModelKind = ModelKind.DECISION_TREE
    params: Optional[ModelParams] = field(default=None)

    def __post_init__(self):
        kind = ModelKind(self.kind)
        object.__setattr__(self, "kind", kind)
        expected = _PARAMS_BY_KIND[kind]
        if self.params is None:
            object.__setattr__(self, "params", expected())
        elif not isinstance(self.params, expected):
            raise ConfigError(
                f"{kind.value} 需要 {expected.__name__}，实际为 {type(self.params).__name__}",
                field="params",
            )

    @classmethod
    def from_mapping(cls, kind: ModelKind | str, mapping: Mapping[str, Any], prefix: str = "") -> "ModelSpec":
        """由扁平参数映射构造（未知键报错）"""
        try:
            kind = ModelKind(kind)
        except ValueError as e:
            raise ConfigError(f"未知模型类型: {kind!r}", field=prefix or "model") from e
        return cls(kind=kind, params=build_params(_PARAMS_BY_KIND[kind], mapping, prefix))

    @staticmethod
    def param_names(kind: ModelKind) -> set[str]:
        return {f.name for f in fields(_PARAMS_BY_KIND[ModelKind(kind)])}


def fit_model(spec: ModelSpec, X: np.ndarray, y: np.ndarray, n_time_labels: int, seed: int) -> ProbabilisticModel:
    """
    按 spec 在原始数组上训练模型

    Args:
        spec: 模型类型与超参数
        X: (n, d) 特征矩阵，可含重复行
        y: (n,) 时间标签，不要求覆盖所有标签
        n_time_labels: |T|
        seed: 训练种子

    Returns:
        训练好的 ProbabilisticModel
    """
    if spec.kind is ModelKind.DECISION_TREE:
        return fit_decision_tree(X, y, n_time_labels, spec.params, seed)
    if spec.kind is ModelKind.RANDOM_FOREST:
        return fit_random_forest(X, y, n_time_labels, spec.params, seed)
    return fit_mlp(X, y, n_time_labels, spec.params, seed)


def train_model(ds: LabeledDataset, spec: ModelSpec, rng_seed: int = 0) -> ProbabilisticModel:
    """按 spec 在数据集上训练模型"""
    return fit_model(spec, ds.X, ds.y, ds.n_time_labels, rng_seed)


__all__ = [
    "ModelKind",
    "ProbabilisticModel",
    "predict_proba",
    "leaf_id",
    "TreeParams",
    "TreeNode",
    "DecisionTreeModel",
    "fit_decision_tree",
    "train_decision_tree",
    "ForestParams",
    "RandomForestModel",
    "fit_random_forest",
    "train_random_forest",
    "MLPParams",
    "MLPModel",
    "fit_mlp",
    "train_mlp",
    "mlp_loss_and_gradients",
    "ModelSpec",
    "ModelParams",
    "fit_model",
    "train_model",
]
