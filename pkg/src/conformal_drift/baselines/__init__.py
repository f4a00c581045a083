"""
基线方法

kdq-tree、LDD-DIS、MB-DL（决策树 + 置换检验）与随机森林启发式。
所有方法返回 LocalTestResult（即 LocalizationResult），由 orientation 标明方向。
"""

from ..core import LocalizationResult
from .kdq import KdqParams, kdq_partition, kdq_tree_localize
from .ldd import LddParams, ldd_dis_localize, local_drift_degree, neighbor_indices
from .mbdl import MbdlParams, leaf_entropies, leaf_permutation_p_values, mbdl_permutation_localize
from .rf_heuristic import RfHeuristicParams, rf_heuristic_localize, total_variation

LocalTestResult = LocalizationResult

__all__ = [
    "LocalTestResult",
    "KdqParams",
    "kdq_partition",
    "kdq_tree_localize",
    "LddParams",
    "ldd_dis_localize",
    "local_drift_degree",
    "neighbor_indices",
    "MbdlParams",
    "leaf_entropies",
    "leaf_permutation_p_values",
    "mbdl_permutation_localize",
    "RfHeuristicParams",
    "rf_heuristic_localize",
    "total_variation",
]
