"""
异常定义

所有模块抛出的异常都继承自 DriftLocalizationError，
CLI 在 main() 中统一映射为退出码：
    ConfigError    -> 2
    DataError      -> 3
    NumericalError -> 4
"""

from typing import Optional


class DriftLocalizationError(Exception):
    """工具包异常基类"""


class ConfigError(DriftLocalizationError, ValueError):
    """
    参数或配置文件无效

    Args:
        message: 错误描述
        field: 出错字段的点分路径（如 "methods.cp-dt.n_boot"）
        line: 配置文件中的行号（1 起始，可选）
    """

    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None):
        self.detail = message
        self.field = field
        self.line = line
        parts = []
        if line is not None:
            parts.append(f"line {line}")
        if field:
            parts.append(f"field '{field}'")
        prefix = f"[{', '.join(parts)}] " if parts else ""
        super().__init__(f"{prefix}{message}")


class DataError(DriftLocalizationError, ValueError):
    """
    数据集不满足不变量（维度不一致、空窗口、CSV 格式错误等）

    Args:
        message: 错误描述
        row: CSV 数据行号（1 起始，不含表头，可选）
    """

    def __init__(self, message: str, row: Optional[int] = None):
        self.row = row
        prefix = f"row {row}: " if row is not None else ""
        super().__init__(f"{prefix}{message}")


class DegenerateTruthError(DataError):
    """ROC-AUC 的真值全为正或全为负"""


class ModelKindError(DriftLocalizationError, TypeError):
    """对不支持的模型类型调用了专用操作（如对 MLP 调用 leaf_id）"""


class NumericalError(DriftLocalizationError, ArithmeticError):
    """数值计算失败（loss 或概率出现 NaN/inf）"""
