"""
基于模型的漂移定位（决策树 + 置换检验）

每个 bootstrap 在 in-bag 样本上训练预测时间标签的决策树，按叶子对 OOB 样本分组。
叶子统计量为其 OOB 样本时间标签的经验熵；熵最大等价于不漂移，因此熵越小越可疑。
置换 OOB 时间标签 n_perm 次重新计算叶子熵，

    p = (1 + #{置换熵 <= 观测熵}) / (1 + n_perm)

每个 in-bag 样本取其所在叶子的 p-value（叶子没有 OOB 样本时不赋值），
最后按与 conformal 定位相同的方式对 bootstrap 取中位数。
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import entr

from ..conformal import BootstrapSplit, PValueTable, sample_bootstrap
from ..core import LabeledDataset, LocalizationResult
from ..errors import ConfigError
from ..models import TreeParams, fit_decision_tree
from ..utils import derive_seed, make_rng, parallel_map


logger = logging.getLogger(__name__)

_ENTROPY_TOLERANCE = 1e-12


@dataclass(frozen=True)
class MbdlParams:
    n_boot: int = 100
    n_perm: int = 100
    max_depth: int = 5
    min_leaf_size: int = 5

    def __post_init__(self):
        if self.n_boot < 1:
            raise ConfigError(f"n_boot 必须 >= 1: {self.n_boot}", field="n_boot")
        if self.n_perm < 1:
            raise ConfigError(f"n_perm 必须 >= 1: {self.n_perm}", field="n_perm")
        self.tree_params()

    def tree_params(self) -> TreeParams:
        return TreeParams(max_depth=self.max_depth, min_leaf_size=self.min_leaf_size)


def leaf_entropies(leaves: np.ndarray, labels: np.ndarray, n_leaves: int, n_labels: int) -> np.ndarray:
    """每个叶子的时间标签经验熵（自然对数）；空叶子为 0"""
    counts = np.bincount(leaves * n_labels + labels, minlength=n_leaves * n_labels)
    counts = counts.reshape(n_leaves, n_labels).astype(np.float64)
    totals = counts.sum(axis=1, keepdims=True)
    proportions = np.divide(counts, totals, out=np.zeros_like(counts), where=totals > 0)
    return entr(proportions).sum(axis=1)


def leaf_permutation_p_values(
    leaves: np.ndarray,
    labels: np.ndarray,
    n_leaves: int,
    n_labels: int,
    n_perm: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """
    叶子熵的置换 p-value

    Args:
        leaves: OOB 样本所在叶子
        labels: OOB 样本时间标签
        n_leaves: 叶子总数
        n_labels: |T|
        n_perm: 置换次数
        rng: 随机数生成器

    Returns:
        (n_leaves,) p-value；没有 OOB 样本的叶子为 NaN
    """
    observed = leaf_entropies(leaves, labels, n_leaves, n_labels)
    at_most = np.zeros(n_leaves)
    for _ in range(n_perm):
        permuted = leaf_entropies(leaves, rng.permutation(labels), n_leaves, n_labels)
        at_most += permuted <= observed + _ENTROPY_TOLERANCE
    p_values = (1.0 + at_most) / (1.0 + n_perm)
    occupied = np.bincount(leaves, minlength=n_leaves) > 0
    return np.where(occupied, p_values, np.nan)


@dataclass(frozen=True)
class _MbdlTask:
    ds: LabeledDataset
    params: MbdlParams
    seed: int


def _run_bootstrap(task: _MbdlTask) -> tuple[np.ndarray, np.ndarray]:
    ds, params = task.ds, task.params
    rng = make_rng(task.seed)
    split: BootstrapSplit = sample_bootstrap(ds.n_samples, rng)
    tree = fit_decision_tree(
        ds.X[split.in_bag], ds.y[split.in_bag], ds.n_time_labels, params.tree_params(), task.seed
    )
    targets = split.unique_in_bag
    if split.oob.size == 0:
        return targets[:0], np.empty(0)
    leaf_p = leaf_permutation_p_values(
        tree.leaf_ids(ds.X[split.oob]), ds.y[split.oob], tree.n_leaves, ds.n_time_labels, params.n_perm, rng
    )
    p_values = leaf_p[tree.leaf_ids(ds.X[targets])]
    keep = ~np.isnan(p_values)
    return targets[keep], p_values[keep]


def mbdl_permutation_localize(
    ds: LabeledDataset,
    params: Optional[MbdlParams] = None,
    rng_seed: int = 0,
    jobs: int = 1,
) -> LocalizationResult:
    """
    MB-DL 漂移定位

    Args:
        ds: 数据集
        params: bootstrap 数、置换数与树参数
        rng_seed: 主种子（第 b 个 bootstrap 使用 derive_seed(rng_seed, b)）
        jobs: 并行 worker 数

    Returns:
        LocalizationResult（P_VALUE 方向；从未被赋值的样本 assigned=False）
    """
    params = params or MbdlParams()
    tasks = [_MbdlTask(ds, params, derive_seed(rng_seed, b)) for b in range(params.n_boot)]
    lists: list[list[float]] = [[] for _ in range(ds.n_samples)]
    for targets, p_values in parallel_map(_run_bootstrap, tasks, jobs):
        for i, p in zip(targets, p_values):
            lists[i].append(float(p))
    table = PValueTable.from_lists(lists, n_boot=params.n_boot)
    if table.n_missing:
        logger.warning("mbdl: %d of %d samples were never assigned", table.n_missing, ds.n_samples)
    return table.to_result()
