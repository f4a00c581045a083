"""
运行时配置管理模块

从环境变量（以及 .env 文件）加载与具体实验无关的运行时设置：
并行度、日志级别、默认重复次数。实验本身的参数放在各组件的
dataclass 与 YAML 配置文件中（见 evaluation.experiment）。

另外提供由扁平键值（YAML 段落或 --param key=value）构造参数 dataclass 的
build_params，类型错误和未知键都带点分字段路径报告。
"""

import os
from collections.abc import Mapping
from dataclasses import dataclass, fields
from types import UnionType
from typing import Any, Optional, TypeVar, Union, get_args, get_origin, get_type_hints

import yaml

from .errors import ConfigError


P = TypeVar("P")


DEFAULT_REPETITIONS = 500
DEFAULT_LOG_LEVEL = "WARNING"
VALID_LOG_LEVELS = {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}


def _parse_int(value: Optional[str]) -> Optional[int]:
    """
    解析整数字符串

    Args:
        value: 字符串值

    Returns:
        解析后的整数，解析失败返回 None
    """
    if value is None:
        return None
    try:
        return int(value)
    except (ValueError, TypeError):
        return None


@dataclass(frozen=True)
class RuntimeSettings:
    """运行时设置"""

    jobs: Optional[int] = None  # None 表示使用全部 CPU 核
    log_level: str = DEFAULT_LOG_LEVEL
    default_repetitions: int = DEFAULT_REPETITIONS

    def resolve_jobs(self, override: Optional[int] = None) -> int:
        """返回实际使用的 worker 数（CLI 参数优先于环境变量）"""
        jobs = override if override is not None else self.jobs
        if jobs is None:
            return os.cpu_count() or 1
        return max(1, jobs)


def get_runtime_settings() -> RuntimeSettings:
    """
    从环境变量加载运行时设置

    环境变量:
        CONFORMAL_DRIFT_JOBS: 默认 worker 数上限（正整数）
        CONFORMAL_DRIFT_LOG_LEVEL: 日志级别，默认 WARNING
        CONFORMAL_DRIFT_REPETITIONS: 配置文件未给出时的默认重复次数，默认 500

    Returns:
        RuntimeSettings 对象

    Raises:
        ConfigError: 环境变量取值无效时抛出
    """
    jobs_str = os.getenv("CONFORMAL_DRIFT_JOBS")
    jobs = _parse_int(jobs_str)
    if jobs_str and (jobs is None or jobs < 1):
        raise ConfigError("CONFORMAL_DRIFT_JOBS 必须是正整数", field="CONFORMAL_DRIFT_JOBS")

    log_level = os.getenv("CONFORMAL_DRIFT_LOG_LEVEL", DEFAULT_LOG_LEVEL).upper()
    if log_level not in VALID_LOG_LEVELS:
        raise ConfigError(
            f"无效的日志级别: {log_level}，必须是 {sorted(VALID_LOG_LEVELS)}",
            field="CONFORMAL_DRIFT_LOG_LEVEL",
        )

    reps_str = os.getenv("CONFORMAL_DRIFT_REPETITIONS")
    reps = _parse_int(reps_str)
    if reps_str and (reps is None or reps < 1):
        raise ConfigError("CONFORMAL_DRIFT_REPETITIONS 必须是正整数", field="CONFORMAL_DRIFT_REPETITIONS")

    return RuntimeSettings(
        jobs=jobs,
        log_level=log_level,
        default_repetitions=reps if reps is not None else DEFAULT_REPETITIONS,
    )


def _coerce(value: Any, hint: Any, field_path: str) -> Any:
    """按类型注解校验/转换单个参数值（int 可提升为 float）"""
    origin = get_origin(hint)
    if origin in (Union, UnionType):
        options = get_args(hint)
        if value is None and type(None) in options:
            return None
        for option in options:
            if option is type(None):
                continue
            try:
                return _coerce(value, option, field_path)
            except ConfigError:
                continue
        raise ConfigError(f"取值 {value!r} 的类型不符合 {hint}", field=field_path)
    if hint is bool:
        if isinstance(value, bool):
            return value
    elif hint is int:
        if isinstance(value, int) and not isinstance(value, bool):
            return value
    elif hint is float:
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return float(value)
    elif hint is str:
        if isinstance(value, str):
            return value
    else:
        return value
    raise ConfigError(f"取值 {value!r} 应为 {hint.__name__}", field=field_path)


def build_params(cls: type[P], mapping: Mapping[str, Any], prefix: str = "") -> P:
    """
    由扁平映射构造参数 dataclass

    未知键、类型错误以及 dataclass 自身的校验失败都转为带点分路径的 ConfigError。

    Args:
        cls: 参数 dataclass 类型
        mapping: 参数映射（YAML 或 --param 解析结果）
        prefix: 字段路径前缀，如 "methods.cp-dt"

    Returns:
        cls 实例

    Raises:
        ConfigError: 参数无效时抛出
    """
    hints = get_type_hints(cls)
    names = {f.name for f in fields(cls) if f.init}
    kwargs = {}
    for key, value in mapping.items():
        path = f"{prefix}.{key}" if prefix else str(key)
        if key not in names:
            raise ConfigError(f"未知参数，可用参数: {sorted(names)}", field=path)
        kwargs[key] = _coerce(value, hints[key], path)
    try:
        return cls(**kwargs)
    except ConfigError as e:
        if prefix and e.field:
            raise ConfigError(e.detail, field=f"{prefix}.{e.field}", line=e.line) from e
        raise


def parse_param_assignments(assignments: list[str]) -> dict[str, Any]:
    """
    解析 CLI 的 key=value 参数，值按 YAML 标量解析（50 -> int，0.1 -> float）

    Raises:
        ConfigError: 缺少 '=' 或键为空
    """
    params: dict[str, Any] = {}
    for item in assignments:
        key, sep, raw = item.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"参数必须写成 key=value: {item!r}", field="--param")
        try:
            params[key] = yaml.safe_load(raw) if raw.strip() else ""
        except yaml.YAMLError as e:
            raise ConfigError(f"无法解析参数值 {raw!r}: {e}", field=key) from e
    return params
