"""
ROC-AUC（Mann-Whitney U 统计量，平均秩处理并列）
"""

from typing import Optional

import numpy as np
from scipy.stats import rankdata

from ..core import DriftGroundTruth, LocalizationResult, Orientation
from ..errors import DataError, DegenerateTruthError
from ..utils import as_float_array


def roc_auc(
    scores,
    truth: DriftGroundTruth,
    orientation: Orientation = Orientation.SCORE,
    assigned: Optional[np.ndarray] = None,
) -> float:
    """
    随机漂移样本的分数高于随机非漂移样本的概率，并列计 ½

    Args:
        scores: 每个样本的分数或 p-value
        truth: 漂移真值
        orientation: P_VALUE 时按 -p 排序（与 1 - p 等价）
        assigned: 参与评估的样本；None 表示全部

    Returns:
        AUC ∈ [0, 1]

    Raises:
        DegenerateTruthError: 评估样本全为正或全为负
    """
    values = as_float_array(scores)
    positive = np.asarray(truth.is_drifting, dtype=bool)
    if values.shape != positive.shape:
        raise DataError(f"分数长度 {values.shape[0]} 与真值长度 {positive.shape[0]} 不一致")
    if assigned is not None:
        keep = np.asarray(assigned, dtype=bool)
        values, positive = values[keep], positive[keep]
    if Orientation(orientation) is Orientation.P_VALUE:
        values = -values

    n_pos = int(positive.sum())
    n_neg = int(positive.shape[0] - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise DegenerateTruthError(f"ROC-AUC 需要正负样本各至少一个: 正 {n_pos}，负 {n_neg}")

    ranks = rankdata(values, method="average")
    u_statistic = ranks[positive].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u_statistic / (n_pos * n_neg))


def result_auc(result: LocalizationResult, truth: DriftGroundTruth) -> float:
    """只在已赋值样本上计算 LocalizationResult 的 ROC-AUC"""
    return roc_auc(result.values, truth, result.orientation, result.assigned)
