"""
结果输出：CSV 表格与静态 SVG 图

CSV 一律用 17 位有效数字、LF 换行，保证重新解析后数值完全一致、
同样的输入产生逐字节相同的文件。SVG 由 matplotlib（Agg 后端）生成，
固定 hashsalt 并去掉日期元数据，因此也是确定性的。
"""

from collections.abc import Sequence
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from ..errors import ConfigError, DataError  # noqa: E402
from .experiment import ResultTable  # noqa: E402
from .sweeps import SweepCurve  # noqa: E402


FORMATS = ("csv", "svg")
CSV_OPTIONS = {"index": False, "float_format": "%.17g", "lineterminator": "\n"}

plt.rcParams["svg.hashsalt"] = "conformal-drift"
plt.rcParams["svg.fonttype"] = "none"


def _check_format(fmt: str) -> str:
    if fmt not in FORMATS:
        raise ConfigError(f"不支持的输出格式 {fmt!r}，可选 {FORMATS}", field="format")
    return fmt


def _prepare(path: str | Path) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise DataError(f"无法创建输出目录 {path.parent}: {e}") from e
    return path


def _write_csv(frame: pd.DataFrame, path: Path) -> Path:
    try:
        frame.to_csv(path, **CSV_OPTIONS)
    except OSError as e:
        raise DataError(f"无法写入 {path}: {e}") from e
    return path


def _save_figure(fig, path: Path) -> Path:
    try:
        fig.savefig(path, format="svg", metadata={"Date": None})
    except OSError as e:
        raise DataError(f"无法写入 {path}: {e}") from e
    finally:
        plt.close(fig)
    return path


def results_frame(table: ResultTable) -> pd.DataFrame:
    """每次重复一行，后接 mean / median / q25 / q75 摘要行"""
    frame = table.to_frame().astype({"rep": object, "n_evaluated": object, "n_excluded": object})
    summary = pd.DataFrame(
        [{"rep": key, "auc": value, "n_evaluated": "", "n_excluded": ""} for key, value in table.summary().items()]
    )
    return pd.concat([frame, summary], ignore_index=True)


def emit_results(table: ResultTable, path: str | Path, format: str = "csv") -> Path:
    """
    写出单个方法的实验结果

    Args:
        table: 实验结果
        path: 输出路径
        format: csv（每次重复一行 + 摘要行）或 svg（AUC 箱线图）

    Returns:
        写入的路径

    Raises:
        DataError: 表为空或路径不可写
    """
    _check_format(format)
    if len(table) == 0:
        raise DataError("结果表为空")
    path = _prepare(path)
    if format == "csv":
        return _write_csv(results_frame(table), path)
    return emit_boxplot([table], path)


def curve_frame(curve: SweepCurve) -> pd.DataFrame:
    return pd.DataFrame({
        "grid_value": list(curve.grid_values),
        "median_auc": curve.median,
        "q25": curve.q25,
        "q75": curve.q75,
    })


def emit_curve(curve: SweepCurve, path: str | Path, format: str = "csv") -> Path:
    """
    写出扫描曲线：CSV（grid_value, median_auc, q25, q75）或 SVG（中位数 + 四分位带）
    """
    _check_format(format)
    path = _prepare(path)
    if format == "csv":
        return _write_csv(curve_frame(curve), path)

    x = np.asarray(curve.grid_values, dtype=np.float64)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.fill_between(x, curve.q25, curve.q75, alpha=0.3, label="q25-q75")
    ax.plot(x, curve.median, marker="o", label="median")
    ax.set_xlabel(curve.parameter)
    ax.set_ylabel("ROC-AUC")
    ax.set_title(curve.method)
    ax.legend(loc="lower right")
    fig.tight_layout()
    return _save_figure(fig, path)


def summarize_tables(tables: Sequence[ResultTable]) -> pd.DataFrame:
    """每个方法一行：method, mean, median, q25, q75, n_repetitions, n_undefined"""
    rows = []
    for table in tables:
        rows.append({
            "method": table.method,
            **table.summary(),
            "n_repetitions": len(table),
            "n_undefined": table.n_undefined,
        })
    return pd.DataFrame(rows, columns=["method", "mean", "median", "q25", "q75", "n_repetitions", "n_undefined"])


def emit_summary(tables: Sequence[ResultTable], path: str | Path) -> Path:
    return _write_csv(summarize_tables(tables), _prepare(path))


def emit_boxplot(tables: Sequence[ResultTable], path: str | Path) -> Path:
    """各方法 AUC 分布的箱线图（SVG）"""
    if not tables:
        raise DataError("没有可绘制的结果")
    path = _prepare(path)
    fig, ax = plt.subplots(figsize=(1.2 * len(tables) + 2, 4))
    data = [table.defined if table.defined.size else np.array([np.nan]) for table in tables]
    ax.boxplot(data)
    ax.set_xticks(range(1, len(tables) + 1), [table.method for table in tables])
    ax.set_ylabel("ROC-AUC")
    ax.set_ylim(-0.02, 1.02)
    fig.tight_layout()
    return _save_figure(fig, path)
