"""
Bootstrap 重采样与覆盖最大化选择

BootstrapSplit 记录一次重采样：in-bag 下标多重集（长度 n，有放回抽取）
与 OOB 集合（未被抽到的下标）。
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import ConfigError, DataError


logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class BootstrapSplit:
    """
    一次 bootstrap 划分

    Attributes:
        in_bag: 抽到的下标（含重复，保持抽取顺序）
        oob: 未抽到的下标（升序）
    """
    in_bag: np.ndarray
    oob: np.ndarray

    def __post_init__(self):
        in_bag = np.array(self.in_bag, dtype=np.int64, copy=True).reshape(-1)
        oob = np.array(self.oob, dtype=np.int64, copy=True).reshape(-1)
        n = in_bag.shape[0]
        if np.intersect1d(in_bag, oob).size:
            raise DataError("OOB 集合与 in-bag 下标相交")
        if not np.array_equal(np.union1d(in_bag, oob), np.arange(n)):
            raise DataError("in-bag 与 OOB 的并集必须恰好是 {0, ..., n-1}")
        in_bag.setflags(write=False)
        oob.setflags(write=False)
        object.__setattr__(self, "in_bag", in_bag)
        object.__setattr__(self, "oob", oob)

    @classmethod
    def from_in_bag(cls, in_bag: Sequence[int], n: Optional[int] = None) -> "BootstrapSplit":
        """由 in-bag 多重集构造，OOB 取补集"""
        in_bag = np.asarray(in_bag, dtype=np.int64)
        n = in_bag.shape[0] if n is None else n
        mask = np.ones(n, dtype=bool)
        mask[in_bag] = False
        return cls(in_bag=in_bag, oob=np.flatnonzero(mask))

    @property
    def n(self) -> int:
        return int(self.in_bag.shape[0])

    @property
    def unique_in_bag(self) -> np.ndarray:
        return np.unique(self.in_bag)

    def in_bag_mask(self) -> np.ndarray:
        mask = np.zeros(self.n, dtype=bool)
        mask[self.in_bag] = True
        return mask


def sample_bootstrap(n: int, rng: np.random.Generator) -> BootstrapSplit:
    """
    有放回地均匀抽取 n 个下标

    Args:
        n: 样本数（>= 2）
        rng: 随机数生成器

    Returns:
        BootstrapSplit
    """
    if n < 2:
        raise DataError(f"bootstrap 需要至少 2 个样本: n={n}")
    return BootstrapSplit.from_in_bag(rng.integers(0, n, size=n), n)


def sample_bootstraps(n: int, n_boot: int, rng: np.random.Generator) -> list[BootstrapSplit]:
    """连续抽取 n_boot 个普通 bootstrap"""
    return [sample_bootstrap(n, rng) for _ in range(n_boot)]


def in_bag_counts(splits: Sequence[BootstrapSplit], n: int) -> np.ndarray:
    """每个样本在多少个 bootstrap 中出现在 in-bag（按去重计）"""
    counts = np.zeros(n, dtype=np.int64)
    for split in splits:
        counts += split.in_bag_mask()
    return counts


def select_coverage_maximizing_bootstraps(
    n: int,
    n_boot: int,
    pool_factor: int,
    rng: np.random.Generator,
    candidates: Optional[Sequence[BootstrapSplit]] = None,
) -> list[BootstrapSplit]:
    """
    从候选池中贪心地挑选 n_boot 个 bootstrap，使最小 in-bag 次数尽量大

    每一步按字典序选择候选：
    1. 加入后所有样本的最小 in-bag 次数最大
    2. 处于该最小值的样本数最少
    3. 候选顺序靠前

    Args:
        n: 样本数
        n_boot: 需要的 bootstrap 数
        pool_factor: 候选池大小 = pool_factor × n_boot
        rng: 随机数生成器（仅在未给出 candidates 时用于抽取候选池）
        candidates: 显式给定的候选池

    Returns:
        按选择顺序排列的 BootstrapSplit 列表
    """
    if n_boot < 1:
        raise ConfigError(f"n_boot 必须 >= 1: {n_boot}", field="n_boot")
    if pool_factor < 1:
        raise ConfigError(f"bootstrap_pool_factor 必须 >= 1: {pool_factor}", field="bootstrap_pool_factor")
    pool = list(candidates) if candidates is not None else sample_bootstraps(n, pool_factor * n_boot, rng)
    if len(pool) <= n_boot:
        return pool

    membership = np.vstack([split.in_bag_mask() for split in pool]).astype(np.int64)
    counts = np.zeros(n, dtype=np.int64)
    remaining = np.ones(len(pool), dtype=bool)
    selected: list[int] = []
    for _ in range(n_boot):
        rows = np.flatnonzero(remaining)
        trial = counts[None, :] + membership[rows]
        mins = trial.min(axis=1)
        at_min = (trial == mins[:, None]).sum(axis=1)
        best = rows[np.lexsort((rows, at_min, -mins))[0]]
        selected.append(int(best))
        remaining[best] = False
        counts += membership[best]

    logger.debug(
        "selected %d of %d bootstraps, min in-bag count %d", n_boot, len(pool), int(counts.min())
    )
    return [pool[i] for i in selected]
