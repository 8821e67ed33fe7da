#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
配置管理与日志初始化

优先级：默认值 < 配置文件 < 环境变量
"""

import copy
import json
import logging
import os
import sys
from typing import Any, Optional

logger = logging.getLogger(__name__)


class Config:
    """配置管理类"""

    DEFAULT_CONFIG = {
        "limits": {
            "max_lattice_worlds": 16,     # 格算法：2^|U| 个前件
            "max_formula_vars": 24,       # 纯公式层操作
            "exhaustive_check_worlds": 8, # 二次检查穷举上限，之上采样
            "oracle_max_worlds": 4,
            "full_verify_max_worlds": 8,  # 规范模型完整验证上限，之上抽查
        },
        "closure": {
            "countermodel_first_above_worlds": 8,
            "max_rounds": 10000,
        },
        "search": {
            "max_states": 3,
            "max_candidates": 200000,
            "time_limit": 30.0,
            "seed": 0,
            "proof_depth": 2,
            "max_pool": 256,
        },
        "checks": {
            "sample_antecedents": 256,
            "seed": 0,
        },
        "logging": {
            "level": "WARNING",
            "file": None,
            "format": "%(asctime)s - %(levelname)s - %(name)s - %(message)s",
        },
    }

    ENV_OVERRIDES = {
        "KLM_LOG_LEVEL": ("logging.level", str),
        "KLM_SEED": ("search.seed", int),
        "KLM_MAX_WORLDS": ("limits.max_lattice_worlds", int),
        "KLM_TIME_LIMIT": ("search.time_limit", float),
    }

    def __init__(self, config_path: Optional[str] = None):
        self.config_path = config_path or os.environ.get("KLM_CONFIG", "config.json")
        self.config = self._load_config()

    def _load_config(self) -> dict:
        """加载配置，优先从文件，其次环境变量"""
        config = copy.deepcopy(self.DEFAULT_CONFIG)

        if os.path.exists(self.config_path):
            try:
                with open(self.config_path, "r", encoding="utf-8") as f:
                    self._deep_update(config, json.load(f))
                logger.debug(f"[Config] 已加载配置文件: {self.config_path}")
            except (OSError, ValueError) as e:
                logger.warning(f"[Config] 配置文件加载失败: {e}")

        self._load_from_env(config)
        return config

    def _load_from_env(self, config: dict):
        """从环境变量加载配置"""
        for env_name, (key, cast) in self.ENV_OVERRIDES.items():
            raw = os.environ.get(env_name)
            if raw is None:
                continue
            try:
                self._set(config, key, cast(raw))
            except ValueError:
                logger.warning(f"[Config] 忽略无效环境变量 {env_name}={raw!r}")

    def _deep_update(self, base: dict, update: dict):
        """深度更新字典"""
        for key, value in update.items():
            if key in base and isinstance(base[key], dict) and isinstance(value, dict):
                self._deep_update(base[key], value)
            else:
                base[key] = value

    @staticmethod
    def _set(config: dict, key: str, value: Any):
        node = config
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = value

    def get(self, key: str, default: Any = None) -> Any:
        """获取配置项，支持点号分隔的嵌套键"""
        value = self.config
        for k in key.split("."):
            if isinstance(value, dict) and k in value:
                value = value[k]
            else:
                return default
        return value

    def set(self, key: str, value: Any):
        self._set(self.config, key, value)

    def save(self, path: Optional[str] = None):
        """保存配置"""
        with open(path or self.config_path, "w", encoding="utf-8") as f:
            json.dump(self.config, f, indent=2, ensure_ascii=False)


def get_config() -> Config:
    """获取配置单例"""
    if not hasattr(get_config, "_instance"):
        get_config._instance = Config()
    return get_config._instance


def set_config(config: Config):
    """替换配置单例（CLI 的 --config 与测试使用）"""
    get_config._instance = config


def configure_logging(config: Optional[Config] = None, verbose: bool = False):
    """按配置安装日志处理器"""
    config = config or get_config()
    level = logging.DEBUG if verbose else getattr(
        logging, str(config.get("logging.level", "WARNING")).upper(), logging.WARNING
    )
    fmt = config.get("logging.format")

    handlers = [logging.StreamHandler(sys.stderr)]
    log_file = config.get("logging.file")
    if log_file:
        handlers.append(logging.FileHandler(log_file, encoding="utf-8", errors="replace"))

    logging.basicConfig(level=level, format=fmt, handlers=handlers, force=True)
