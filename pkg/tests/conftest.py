"""
共享 fixtures：小数据集、带种子的随机数生成器
"""

import numpy as np
import pytest

from conformal_drift.core import LabeledDataset
from conformal_drift.data import ClassSwapSpec, generate_class_swap_stream, generate_no_drift_stream


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def separable_stream():
    """2×60 样本、10 个漂移样本的可分 class-swap 数据流"""
    return generate_class_swap_stream(ClassSwapSpec(seed=3))


@pytest.fixture
def small_stream():
    """2×20 样本的小数据流，用于快速的端到端测试"""
    return generate_class_swap_stream(
        ClassSwapSpec(samples_per_window=20, n_drifting_per_window=3, dimension=4, seed=5)
    )


@pytest.fixture
def no_drift_stream():
    return generate_no_drift_stream(200, 5, seed=11)


@pytest.fixture
def four_point_dataset():
    """一维 {0→0, 1→0, 10→1, 11→1}"""
    return LabeledDataset(X=np.array([[0.0], [1.0], [10.0], [11.0]]), y=np.array([0, 0, 1, 1]))


@pytest.fixture
def bench_yaml(tmp_path):
    """两个便宜方法、3 次重复的 bench 配置文件"""
    path = tmp_path / "bench.yaml"
    path.write_text(
        "n_repetitions: 3\n"
        "data:\n"
        "  kind: class_swap\n"
        "  samples_per_window: 20\n"
        "  n_drifting_per_window: 3\n"
        "  dimension: 4\n"
        "methods:\n"
        "  kdq: {}\n"
        "  ldd:\n"
        "    n_resample: 5\n",
        encoding="utf-8",
    )
    return path
