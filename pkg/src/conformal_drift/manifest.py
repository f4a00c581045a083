"""
运行清单（RunManifest）

每次命令运行都会在输出旁写一份 YAML 清单，记录命令、展开全部默认值后的配置、
主种子和工具版本。清单不记录 --jobs，所以不同并行度下的清单逐字节相同；
bench / sweep 可以直接把清单当配置文件重新运行。
"""

from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .errors import ConfigError, DataError


@dataclass(frozen=True)
class RunManifest:
    """
    Attributes:
        command: 子命令名（localize / bench / sweep）
        arguments: 影响结果的命令参数（输入路径、方法名、扫描网格等）
        config: 展开默认值后的完整配置
        seed: 主种子
        version: 工具版本
    """
    command: str
    config: dict[str, Any]
    seed: int
    version: str
    arguments: dict[str, Any] = field(default_factory=dict)

    def to_yaml(self) -> str:
        payload = asdict(self)
        ordered = {key: payload[key] for key in ("command", "version", "seed", "arguments", "config")}
        return yaml.safe_dump(ordered, sort_keys=False, allow_unicode=True, default_flow_style=False)

    def write(self, path: str | Path) -> Path:
        path = Path(path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(self.to_yaml(), encoding="utf-8", newline="\n")
        except OSError as e:
            raise DataError(f"无法写入清单 {path}: {e}") from e
        return path

    @classmethod
    def load(cls, path: str | Path) -> "RunManifest":
        """
        读取清单文件

        Raises:
            ConfigError: 文件缺少必需字段或不是合法 YAML
        """
        try:
            payload = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
        except (OSError, yaml.YAMLError) as e:
            raise ConfigError(f"无法读取清单 {path}: {e}") from e
        if not isinstance(payload, dict):
            raise ConfigError(f"清单 {path} 顶层必须是映射")
        missing = [key for key in ("command", "config", "seed", "version") if key not in payload]
        if missing:
            raise ConfigError(f"清单缺少字段: {missing}", field=missing[0])
        return cls(
            command=payload["command"],
            config=payload["config"],
            seed=payload["seed"],
            version=payload["version"],
            arguments=payload.get("arguments") or {},
        )


def manifest_path_for(output: str | Path) -> Path:
    """文件输出旁的清单路径：results.csv -> results.manifest.yaml"""
    output = Path(output)
    return output.with_name(f"{output.stem}.manifest.yaml")
