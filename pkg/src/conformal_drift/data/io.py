"""
Embedding CSV 读写

格式：表头行；列 t（整数时间标签）；可选列 drift（0/1 漂移真值）；
其余列为 f0..f{d-1}。UTF-8，LF 或 CRLF 换行，行顺序即样本顺序。
"""

import re
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd

from ..core import DriftGroundTruth, LabeledDataset
from ..errors import DataError


TIME_COLUMN = "t"
DRIFT_COLUMN = "drift"
_FEATURE_COLUMN = re.compile(r"^f(\d+)$")


def _feature_columns(columns: list[str]) -> list[str]:
    features = {}
    for column in columns:
        if column in (TIME_COLUMN, DRIFT_COLUMN):
            continue
        match = _FEATURE_COLUMN.match(column)
        if match is None:
            raise DataError(f"未知列 {column!r}，只允许 t、drift 和 f0..f{{d-1}}")
        features[int(match.group(1))] = column
    if not features:
        raise DataError("CSV 中没有特征列")
    expected = list(range(len(features)))
    if sorted(features) != expected:
        raise DataError(f"特征列必须是连续的 f0..f{len(features) - 1}，实际 {sorted(features.values())}")
    return [features[i] for i in expected]


def _numeric_column(frame: pd.DataFrame, column: str) -> np.ndarray:
    """将字符串列转为数值，第一处非法值报告行号（1 起始，不含表头）"""
    text = frame[column].str.strip()
    checked = pd.to_numeric(text, errors="coerce").to_numpy(dtype=np.float64, na_value=np.nan)
    bad = np.flatnonzero(~np.isfinite(checked))
    if bad.size:
        row = int(bad[0])
        raise DataError(f"列 {column} 的值 {frame[column].iloc[row]!r} 不是有限数值", row=row + 1)
    # 按 Python float 语义重新解析，保证 17 位有效数字逐位还原
    return text.to_numpy(dtype=object).astype(np.float64)


def load_embedding_csv(
    path: str | Path,
    n_time_labels: Optional[int] = None,
) -> tuple[LabeledDataset, Optional[DriftGroundTruth]]:
    """
    读取 embedding CSV

    Args:
        path: 文件路径
        n_time_labels: |T|；默认取最大标签 + 1

    Returns:
        (数据集, 漂移真值或 None)

    Raises:
        DataError: 文件不符合格式（行号在消息中给出）
    """
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    except FileNotFoundError as e:
        raise DataError(f"文件不存在: {path}") from e
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise DataError(f"无法解析 CSV {path}: {e}") from e

    frame.columns = [str(c).strip() for c in frame.columns]
    if TIME_COLUMN not in frame.columns:
        raise DataError(f"缺少时间标签列 {TIME_COLUMN!r}")
    if frame.empty:
        raise DataError("CSV 中没有数据行")
    features = _feature_columns(list(frame.columns))

    labels = _numeric_column(frame, TIME_COLUMN)
    bad = np.flatnonzero((labels != np.round(labels)) | (labels < 0))
    if bad.size:
        row = int(bad[0])
        raise DataError(f"时间标签 {frame[TIME_COLUMN].iloc[row]!r} 不是非负整数", row=row + 1)
    y = labels.astype(np.int64)
    if n_time_labels is not None:
        unknown = np.flatnonzero(y >= n_time_labels)
        if unknown.size:
            row = int(unknown[0])
            raise DataError(f"未知时间标签 {y[row]}（|T|={n_time_labels}）", row=row + 1)

    X = np.column_stack([_numeric_column(frame, column) for column in features])

    truth = None
    if DRIFT_COLUMN in frame.columns:
        drift = _numeric_column(frame, DRIFT_COLUMN)
        bad = np.flatnonzero(~np.isin(drift, (0.0, 1.0)))
        if bad.size:
            row = int(bad[0])
            raise DataError(f"drift 列只能是 0 或 1，实际 {frame[DRIFT_COLUMN].iloc[row]!r}", row=row + 1)
        truth = DriftGroundTruth(drift.astype(bool))

    ds = LabeledDataset(X=X, y=y, n_time_labels=n_time_labels or int(y.max()) + 1)
    return ds, truth


def save_embedding_csv(
    ds: LabeledDataset,
    path: str | Path,
    truth: Optional[DriftGroundTruth] = None,
) -> Path:
    """
    写出 embedding CSV（17 位有效数字，LF 换行）

    Returns:
        写入的路径
    """
    path = Path(path)
    columns = {TIME_COLUMN: ds.y}
    if truth is not None:
        truth.check_matches(ds)
        columns[DRIFT_COLUMN] = truth.is_drifting.astype(np.int64)
    for j in range(ds.dimension):
        columns[f"f{j}"] = ds.X[:, j]
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(columns).to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
    return path
