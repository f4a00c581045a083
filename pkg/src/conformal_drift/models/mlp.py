"""
单隐层 MLP（ReLU + softmax，交叉熵损失）

输入按训练集逐特征标准化，均值和标准差保存在模型中。
默认用 Adam 更新规则做 mini-batch 梯度下降；optimizer="sgd" 退回普通 SGD。
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..core import LabeledDataset
from ..errors import ConfigError, NumericalError
from .base import ModelKind, ProbabilisticModel


logger = logging.getLogger(__name__)

Weights = dict[str, np.ndarray]

_ADAM_BETA1 = 0.9
_ADAM_BETA2 = 0.999
_ADAM_EPS = 1e-8


@dataclass(frozen=True)
class MLPParams:
    """MLP 超参数"""
    hidden_units: int = 64
    epochs: int = 100
    learning_rate: float = 0.01
    batch_size: int = 32
    optimizer: str = "adam"

    def __post_init__(self):
        if self.hidden_units < 1:
            raise ConfigError(f"hidden_units 必须 >= 1: {self.hidden_units}", field="hidden_units")
        if self.epochs < 0:
            raise ConfigError(f"epochs 必须非负: {self.epochs}", field="epochs")
        if not self.learning_rate > 0:
            raise ConfigError(f"learning_rate 必须为正: {self.learning_rate}", field="learning_rate")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size 必须 >= 1: {self.batch_size}", field="batch_size")
        if self.optimizer not in ("adam", "sgd"):
            raise ConfigError(f"optimizer 必须是 adam 或 sgd: {self.optimizer!r}", field="optimizer")


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def _forward(weights: Weights, X: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    z1 = X @ weights["W1"] + weights["b1"]
    h = np.maximum(z1, 0.0)
    logits = h @ weights["W2"] + weights["b2"]
    return z1, h, logits


def mlp_loss_and_gradients(weights: Weights, X: np.ndarray, y: np.ndarray) -> tuple[float, Weights]:
    """
    平均交叉熵损失及其解析梯度

    Args:
        weights: {"W1", "b1", "W2", "b2"}
        X: (m, d) 已标准化的输入
        y: (m,) 时间标签

    Returns:
        (loss, grads)，grads 的键与 weights 相同
    """
    m = X.shape[0]
    z1, h, logits = _forward(weights, X)
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_probs = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    loss = float(-log_probs[np.arange(m), y].mean())

    d_logits = np.exp(log_probs)
    d_logits[np.arange(m), y] -= 1.0
    d_logits /= m
    d_h = d_logits @ weights["W2"].T
    d_z1 = d_h * (z1 > 0.0)
    grads = {
        "W1": X.T @ d_z1,
        "b1": d_z1.sum(axis=0),
        "W2": h.T @ d_logits,
        "b2": d_logits.sum(axis=0),
    }
    return loss, grads


def init_weights(dimension: int, n_time_labels: int, hidden_units: int, rng: np.random.Generator) -> Weights:
    """He 初始化隐层；输出层权重很小，未训练时输出接近均匀分布"""
    return {
        "W1": rng.normal(0.0, np.sqrt(2.0 / dimension), size=(dimension, hidden_units)),
        "b1": np.zeros(hidden_units),
        "W2": rng.normal(0.0, 0.01, size=(hidden_units, n_time_labels)),
        "b2": np.zeros(n_time_labels),
    }


class MLPModel(ProbabilisticModel):
    """训练好的 MLP，θ = 权重 + 标准化参数"""

    kind = ModelKind.MLP

    def __init__(self, weights: Weights, mean: np.ndarray, scale: np.ndarray, n_time_labels: int):
        super().__init__(n_time_labels, mean.shape[0])
        self.weights = {k: v.copy() for k, v in weights.items()}
        for v in self.weights.values():
            v.setflags(write=False)
        self.mean = mean
        self.scale = scale

    def standardize(self, X: np.ndarray) -> np.ndarray:
        return (X - self.mean) / self.scale

    def _predict_proba(self, X: np.ndarray) -> np.ndarray:
        _, _, logits = _forward(self.weights, self.standardize(X))
        return _softmax(logits)


def fit_mlp(
    X: np.ndarray,
    y: np.ndarray,
    n_time_labels: int,
    params: Optional[MLPParams] = None,
    seed: int = 0,
) -> MLPModel:
    """
    在原始数组上训练 MLP

    Args:
        X: (n, d) 特征矩阵（可含 bootstrap 重复行）
        y: (n,) 时间标签
        n_time_labels: |T|
        params: 超参数
        seed: 初始化与 mini-batch 顺序的种子

    Returns:
        MLPModel

    Raises:
        NumericalError: 训练中 loss 出现非有限值
    """
    params = params or MLPParams()
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    n, d = X.shape
    rng = np.random.default_rng(seed)

    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale[scale == 0.0] = 1.0
    Xs = (X - mean) / scale

    weights = init_weights(d, n_time_labels, params.hidden_units, rng)
    first = {k: np.zeros_like(v) for k, v in weights.items()}
    second = {k: np.zeros_like(v) for k, v in weights.items()}
    step = 0
    loss = float("nan")

    for epoch in range(params.epochs):
        order = rng.permutation(n)
        for start in range(0, n, params.batch_size):
            batch = order[start:start + params.batch_size]
            loss, grads = mlp_loss_and_gradients(weights, Xs[batch], y[batch])
            if not np.isfinite(loss):
                raise NumericalError(f"MLP loss 在第 {epoch} 轮变为非有限值")
            step += 1
            for key, grad in grads.items():
                if params.optimizer == "sgd":
                    weights[key] -= params.learning_rate * grad
                    continue
                first[key] = _ADAM_BETA1 * first[key] + (1.0 - _ADAM_BETA1) * grad
                second[key] = _ADAM_BETA2 * second[key] + (1.0 - _ADAM_BETA2) * grad ** 2
                m_hat = first[key] / (1.0 - _ADAM_BETA1 ** step)
                v_hat = second[key] / (1.0 - _ADAM_BETA2 ** step)
                weights[key] -= params.learning_rate * m_hat / (np.sqrt(v_hat) + _ADAM_EPS)

    if not all(np.all(np.isfinite(v)) for v in weights.values()):
        raise NumericalError("MLP 权重出现非有限值")
    logger.debug("trained mlp: n=%d epochs=%d last_loss=%.4g", n, params.epochs, loss)
    return MLPModel(weights, mean, scale, n_time_labels)


def train_mlp(
    ds: LabeledDataset,
    params: Optional[MLPParams] = None,
    rng_seed: int = 0,
) -> MLPModel:
    """在数据集上训练 MLP（预测时间标签）"""
    return fit_mlp(ds.X, ds.y, ds.n_time_labels, params, rng_seed)
