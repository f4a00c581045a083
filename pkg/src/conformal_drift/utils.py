"""
通用工具函数和常量

提供:
- 种子派生（按索引从主种子派生子种子，保证并行结果与调度无关）
- p-value 截断
- 日志初始化（rich.logging.RichHandler）
- 有序并行 map（ProcessPoolExecutor）
"""

import logging
import os
import sys
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from typing import TypeVar

import numpy as np
from rich.console import Console
from rich.logging import RichHandler


T = TypeVar("T")
R = TypeVar("R")

PACKAGE_LOGGER = "conformal_drift"

# 分布求和校验的容差
PRIOR_TOLERANCE = 1e-12
PROBA_TOLERANCE = 1e-9


def derive_seed(master_seed: int, *indices: int) -> int:
    """
    从主种子和索引路径派生子种子

    同一 (master_seed, indices) 总是得到同一个子种子，
    与计算顺序、并行度无关。

    Args:
        master_seed: 主种子（非负整数）
        indices: 索引路径，如 (bootstrap_index,) 或 (repetition, 1)

    Returns:
        64 位以内的非负整数种子
    """
    seq = np.random.SeedSequence([int(master_seed), *(int(i) for i in indices)])
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def make_rng(seed: int) -> np.random.Generator:
    """创建 numpy Generator"""
    return np.random.default_rng(seed)


def clamp_probability(values):
    """将 p-value 截断到 [0, 1]（算术误差可能越界）"""
    return np.clip(values, 0.0, 1.0)


def setup_logging(level: str = "WARNING") -> logging.Logger:
    """
    初始化包级 logger

    只安装一个 RichHandler（输出到 stderr），重复调用只更新级别。

    Args:
        level: 日志级别名称

    Returns:
        包级 logger
    """
    logger = logging.getLogger(PACKAGE_LOGGER)
    logger.setLevel(level.upper())
    if not any(isinstance(h, RichHandler) for h in logger.handlers):
        handler = RichHandler(
            console=Console(
                stderr=True,
                legacy_windows=(sys.platform == "win32"),
                no_color=os.getenv("NO_COLOR") is not None,
            ),
            show_path=False,
            rich_tracebacks=True,
        )
        handler.setFormatter(logging.Formatter("%(message)s"))
        logger.addHandler(handler)
        logger.propagate = False
    return logger


def parallel_map(fn: Callable[[T], R], items: Iterable[T], jobs: int = 1) -> list[R]:
    """
    有序并行 map

    jobs <= 1 时在当前进程内顺序执行；否则使用进程池。
    返回列表的顺序与输入顺序一致，与完成顺序无关。
    fn 必须是模块级可 pickle 的函数。

    Args:
        fn: 作用于每个元素的函数
        items: 输入元素
        jobs: worker 数上限

    Returns:
        结果列表
    """
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    workers = min(jobs, len(items))
    with ProcessPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(fn, items))


def as_float_array(values: Sequence[float] | np.ndarray) -> np.ndarray:
    """转换为一维 float64 数组"""
    return np.asarray(values, dtype=np.float64).reshape(-1)
