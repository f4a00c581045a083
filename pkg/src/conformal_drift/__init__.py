"""
Conformal Drift Localization

基于 bootstrap 校准 conformal p-value 的概念漂移定位：
- 为两窗口数据流中的每个样本给出 "该样本不漂移" 的 p-value
- 附带 kdq-tree、LDD-DIS、MB-DL、随机森林启发式等基线方法
- 在合成数据与预计算 embedding 上按 ROC-AUC 做重复评测
"""

__version__ = "0.1.0"

from .conformal import CPConfig, PValueTable, cp_drift_localization, split_conformal_localization
from .core import (
    DriftGroundTruth,
    LabeledDataset,
    LocalizationResult,
    Orientation,
    Sample,
    TimePrior,
    make_window_pair,
    time_label_prior,
)
from .errors import (
    ConfigError,
    DataError,
    DegenerateTruthError,
    DriftLocalizationError,
    ModelKindError,
    NumericalError,
)
from .evaluation import roc_auc, run_experiment

__all__ = [
    "__version__",
    "Sample",
    "LabeledDataset",
    "DriftGroundTruth",
    "TimePrior",
    "LocalizationResult",
    "Orientation",
    "make_window_pair",
    "time_label_prior",
    "CPConfig",
    "PValueTable",
    "cp_drift_localization",
    "split_conformal_localization",
    "roc_auc",
    "run_experiment",
    "DriftLocalizationError",
    "ConfigError",
    "DataError",
    "DegenerateTruthError",
    "ModelKindError",
    "NumericalError",
]
