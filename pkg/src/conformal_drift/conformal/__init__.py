"""
Conformal 模块

bootstrap 校准的 conformal p-value 漂移定位，以及 split-conformal 变体
"""

from .bootstrap import (
    BootstrapSplit,
    in_bag_counts,
    sample_bootstrap,
    sample_bootstraps,
    select_coverage_maximizing_bootstraps,
)
from .localize import (
    CPConfig,
    PValueTable,
    SplitCPConfig,
    cp_drift_localization,
    draw_bootstraps,
    split_conformal_localization,
)
from .pvalues import (
    CalibrationSet,
    class_p_values,
    conformal_p_value,
    conformal_p_values,
    median_aggregate,
    min_class_p_value,
    prediction_set,
    rejects_non_drifting,
)

__all__ = [
    "BootstrapSplit",
    "sample_bootstrap",
    "sample_bootstraps",
    "select_coverage_maximizing_bootstraps",
    "in_bag_counts",
    "CalibrationSet",
    "conformal_p_value",
    "conformal_p_values",
    "class_p_values",
    "min_class_p_value",
    "median_aggregate",
    "prediction_set",
    "rejects_non_drifting",
    "CPConfig",
    "SplitCPConfig",
    "PValueTable",
    "cp_drift_localization",
    "draw_bootstraps",
    "split_conformal_localization",
]
