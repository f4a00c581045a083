"""
随机森林启发式

分数 = 样本的 OOB 平均预测分布与全局时间先验之间的总变差距离。
没有 OOB 预测的样本分数为 0。
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..core import LabeledDataset, LocalizationResult, Orientation, time_label_prior
from ..models import ForestParams, fit_random_forest


@dataclass(frozen=True)
class RfHeuristicParams:
    n_trees: int = 100
    max_depth: int = 8
    min_leaf_size: int = 2
    feature_subsample: str | int = "sqrt"

    def forest_params(self) -> ForestParams:
        return ForestParams(
            n_trees=self.n_trees,
            max_depth=self.max_depth,
            min_leaf_size=self.min_leaf_size,
            feature_subsample=self.feature_subsample,
        )

    def __post_init__(self):
        self.forest_params()


def total_variation(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """按最后一维计算 TV 距离 ½ Σ|p - q|"""
    return 0.5 * np.abs(np.asarray(p) - np.asarray(q)).sum(axis=-1)


def rf_heuristic_localize(
    ds: LabeledDataset,
    params: Optional[RfHeuristicParams] = None,
    rng_seed: int = 0,
    jobs: int = 1,
) -> LocalizationResult:
    """随机森林 OOB 预测与先验的 TV 距离（SCORE 方向）"""
    params = params or RfHeuristicParams()
    forest = fit_random_forest(ds.X, ds.y, ds.n_time_labels, params.forest_params(), rng_seed, jobs=jobs)
    prior = time_label_prior(ds)
    probs, has_oob = forest.oob_predict_proba(fallback=prior)
    scores = np.where(has_oob, total_variation(probs, prior.probs), 0.0)
    return LocalizationResult(values=scores, orientation=Orientation.SCORE)
