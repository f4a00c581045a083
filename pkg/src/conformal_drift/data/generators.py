"""
合成漂移数据流生成器

用各向同性高斯团代替图像 embedding 的类别：
- class-swap：一个类不漂移，一个类只在窗口 0 出现，一个类只在窗口 1 出现
- subclass-split：一个类被拆成两个子团，窗口 0 取一侧，窗口 1 取另一侧（细微漂移）
- no-drift：两个窗口独立同分布，用于检验 p-value 的有效性

所有生成器由 spec 中的种子完全决定。
"""

from dataclasses import dataclass, replace
from typing import Union

import numpy as np

from ..core import AFTER, BEFORE, DriftGroundTruth, LabeledDataset
from ..errors import ConfigError


@dataclass(frozen=True)
class ClassSwapSpec:
    """
    Class-swap 数据流参数

    默认对应 2×60 个样本、10 个漂移样本的可分场景。
    """
    n_classes: int = 3
    samples_per_window: int = 60
    n_drifting_per_window: int = 5
    dimension: int = 8
    sigma: float = 1.0
    # 类中心在 [-center_range, center_range]^d 上均匀抽取
    center_range: float = 10.0
    seed: int = 0

    def __post_init__(self):
        if self.n_classes < 3:
            raise ConfigError(f"n_classes 至少为 3: {self.n_classes}", field="n_classes")
        if self.samples_per_window < 1:
            raise ConfigError(f"samples_per_window 必须 >= 1: {self.samples_per_window}", field="samples_per_window")
        if not 0 <= self.n_drifting_per_window <= self.samples_per_window:
            raise ConfigError(
                f"n_drifting_per_window 必须在 [0, {self.samples_per_window}] 内: {self.n_drifting_per_window}",
                field="n_drifting_per_window",
            )
        _check_geometry(self.dimension, self.sigma, self.center_range)


@dataclass(frozen=True)
class SubclassSplitSpec:
    """
    Subclass-split 数据流参数

    一个类沿随机单位方向被拆成中心相距 2 × offset 的两个子团。
    """
    n_classes: int = 10
    samples_per_window: int = 250
    n_drifting_per_window: int = 49
    dimension: int = 8
    sigma: float = 1.0
    offset: float = 1.0
    center_range: float = 10.0
    seed: int = 0

    def __post_init__(self):
        if self.n_classes < 2:
            raise ConfigError(f"n_classes 至少为 2: {self.n_classes}", field="n_classes")
        if self.samples_per_window < 1:
            raise ConfigError(f"samples_per_window 必须 >= 1: {self.samples_per_window}", field="samples_per_window")
        if not 0 <= self.n_drifting_per_window <= self.samples_per_window:
            raise ConfigError(
                f"n_drifting_per_window 必须在 [0, {self.samples_per_window}] 内: {self.n_drifting_per_window}",
                field="n_drifting_per_window",
            )
        if self.offset < 0:
            raise ConfigError(f"offset 必须非负: {self.offset}", field="offset")
        _check_geometry(self.dimension, self.sigma, self.center_range)


@dataclass(frozen=True)
class NoDriftSpec:
    """无漂移数据流参数（两个窗口各 n/2 个标准高斯样本）"""
    n: int = 200
    dimension: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.n < 2 or self.n % 2:
            raise ConfigError(f"n 必须是 >= 2 的偶数: {self.n}", field="n")
        if self.dimension < 1:
            raise ConfigError(f"dimension 必须 >= 1: {self.dimension}", field="dimension")


StreamSpec = Union[ClassSwapSpec, SubclassSplitSpec, NoDriftSpec]


def _check_geometry(dimension: int, sigma: float, center_range: float) -> None:
    if dimension < 1:
        raise ConfigError(f"dimension 必须 >= 1: {dimension}", field="dimension")
    if not sigma > 0:
        raise ConfigError(f"sigma 必须为正: {sigma}", field="sigma")
    if not center_range > 0:
        raise ConfigError(f"center_range 必须为正: {center_range}", field="center_range")


def _window(
    rng: np.random.Generator,
    stable: np.ndarray,
    drifting: np.ndarray,
    label: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """拼接一个窗口并打乱顺序，返回 (X, y, is_drifting)"""
    X = np.vstack([stable, drifting])
    flags = np.concatenate([np.zeros(len(stable), dtype=bool), np.ones(len(drifting), dtype=bool)])
    order = rng.permutation(X.shape[0])
    return X[order], np.full(X.shape[0], label, dtype=np.int64), flags[order]


def _assemble(windows: list[tuple[np.ndarray, np.ndarray, np.ndarray]]) -> tuple[LabeledDataset, DriftGroundTruth]:
    X = np.vstack([w[0] for w in windows])
    y = np.concatenate([w[1] for w in windows])
    flags = np.concatenate([w[2] for w in windows])
    return LabeledDataset(X=X, y=y, n_time_labels=2), DriftGroundTruth(flags)


def generate_class_swap_stream(spec: ClassSwapSpec) -> tuple[LabeledDataset, DriftGroundTruth]:
    """
    生成 class-swap 数据流

    随机指定类 A（不漂移）、B（漂移前）、C（漂移后）。窗口 0 由 A 的
    samples_per_window - n_drifting 个样本和 B 的 n_drifting 个样本组成，
    窗口 1 同理使用 C。B、C 的样本为漂移样本。

    Returns:
        (数据集, 漂移真值)，样本顺序为窗口 0 在前
    """
    rng = np.random.default_rng(spec.seed)
    centers = rng.uniform(-spec.center_range, spec.center_range, size=(spec.n_classes, spec.dimension))
    stable, before, after = rng.choice(spec.n_classes, size=3, replace=False)
    n_stable = spec.samples_per_window - spec.n_drifting_per_window
    n_drift = spec.n_drifting_per_window

    def draw(cls: int, size: int) -> np.ndarray:
        return centers[cls] + spec.sigma * rng.standard_normal((size, spec.dimension))

    windows = [
        _window(rng, draw(stable, n_stable), draw(before, n_drift), BEFORE),
        _window(rng, draw(stable, n_stable), draw(after, n_drift), AFTER),
    ]
    return _assemble(windows)


def generate_subclass_split_stream(spec: SubclassSplitSpec) -> tuple[LabeledDataset, DriftGroundTruth]:
    """
    生成 subclass-split 数据流

    不漂移的样本在两个窗口中都从其余类中均匀选类后抽取；
    窗口 0 的漂移样本来自被拆分类的一侧子团，窗口 1 来自另一侧。
    """
    rng = np.random.default_rng(spec.seed)
    centers = rng.uniform(-spec.center_range, spec.center_range, size=(spec.n_classes, spec.dimension))
    split_class = int(rng.integers(spec.n_classes))
    direction = rng.standard_normal(spec.dimension)
    direction /= np.linalg.norm(direction)
    others = np.array([c for c in range(spec.n_classes) if c != split_class])
    n_stable = spec.samples_per_window - spec.n_drifting_per_window
    n_drift = spec.n_drifting_per_window

    def draw_stable() -> np.ndarray:
        classes = rng.choice(others, size=n_stable)
        return centers[classes] + spec.sigma * rng.standard_normal((n_stable, spec.dimension))

    def draw_side(sign: float) -> np.ndarray:
        center = centers[split_class] + sign * spec.offset * direction
        return center + spec.sigma * rng.standard_normal((n_drift, spec.dimension))

    windows = [
        _window(rng, draw_stable(), draw_side(-1.0), BEFORE),
        _window(rng, draw_stable(), draw_side(1.0), AFTER),
    ]
    return _assemble(windows)


def generate_no_drift_stream(n: int, d: int, seed: int) -> tuple[LabeledDataset, DriftGroundTruth]:
    """
    生成无漂移数据流：两个窗口各 n/2 个 d 维标准高斯样本

    Raises:
        ConfigError: n 为奇数
    """
    spec = NoDriftSpec(n=n, dimension=d, seed=seed)
    rng = np.random.default_rng(spec.seed)
    X = rng.standard_normal((spec.n, spec.dimension))
    half = spec.n // 2
    y = np.concatenate([np.full(half, BEFORE, dtype=np.int64), np.full(half, AFTER, dtype=np.int64)])
    return LabeledDataset(X=X, y=y, n_time_labels=2), DriftGroundTruth(np.zeros(spec.n, dtype=bool))


def generate_stream(spec: StreamSpec) -> tuple[LabeledDataset, DriftGroundTruth]:
    """按 spec 类型分派到对应的生成器"""
    if isinstance(spec, ClassSwapSpec):
        return generate_class_swap_stream(spec)
    if isinstance(spec, SubclassSplitSpec):
        return generate_subclass_split_stream(spec)
    if isinstance(spec, NoDriftSpec):
        return generate_no_drift_stream(spec.n, spec.dimension, spec.seed)
    raise ConfigError(f"未知的数据流类型: {type(spec).__name__}", field="data.kind")


def with_seed(spec: StreamSpec, seed: int) -> StreamSpec:
    """替换 spec 中的种子"""
    return replace(spec, seed=seed)
