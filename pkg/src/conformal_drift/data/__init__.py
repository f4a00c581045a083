"""
数据模块

合成漂移数据流生成器，以及预计算 embedding 的 CSV 读写
"""

from .generators import (
    ClassSwapSpec,
    NoDriftSpec,
    StreamSpec,
    SubclassSplitSpec,
    generate_class_swap_stream,
    generate_no_drift_stream,
    generate_stream,
    generate_subclass_split_stream,
    with_seed,
)
from .io import load_embedding_csv, save_embedding_csv

__all__ = [
    "ClassSwapSpec",
    "SubclassSplitSpec",
    "NoDriftSpec",
    "StreamSpec",
    "generate_class_swap_stream",
    "generate_subclass_split_stream",
    "generate_no_drift_stream",
    "generate_stream",
    "with_seed",
    "load_embedding_csv",
    "save_embedding_csv",
]
