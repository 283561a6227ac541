"""
持久化配置：读写 ~/.l1_basis_config.json（--config 或 L1B_CONFIG 可改路径）。
优先级: CLI 显式参数 > JSON 配置文件 > env 变量 > config.py 默认值。
"""
import os
import json
import logging
from typing import Dict, Any, Optional

try:
    from . import paths
except ImportError:
    import paths

logger = logging.getLogger(__name__)

CONFIG_FILE = paths.config_path

# 配置键 -> env 变量
ENV_MAP = {
    'enumeration_cap': 'L1B_ENUMERATION_CAP',
    'inversion_cap': 'L1B_INVERSION_CAP',
    'precision': 'L1B_PRECISION',
    'certified_digits': 'L1B_CERTIFIED_DIGITS',
    'workers': 'L1B_WORKERS',
    'seed': 'L1B_SEED',
}


def get_default_config() -> Dict[str, Any]:
    """默认配置骨架（从 config.py 取默认值）。"""
    try:
        from . import config as _c
    except ImportError:
        import config as _c
    return {
        'enumeration_cap': _c.ENUMERATION_CAP,
        'inversion_cap': _c.INVERSION_CAP,
        'precision': _c.DISPLAY_PRECISION,
        'certified_digits': _c.CERTIFIED_DIGITS,
        'workers': _c.WORKERS,
        'seed': _c.DEFAULT_SEED,
    }


def load_config(path: Optional[str] = None) -> Dict[str, Any]:
    """
    读取 JSON 配置，合并默认值（缺失键用默认值填充）。
    文件不存在或损坏时返回默认配置，不抛异常。
    """
    path = path or CONFIG_FILE
    cfg = get_default_config()
    if not os.path.exists(path):
        return cfg
    try:
        with open(path, 'r', encoding='utf-8') as f:
            saved = json.load(f)
        if isinstance(saved, dict):
            cfg.update({k: v for k, v in saved.items() if k in cfg})
    except (json.JSONDecodeError, OSError) as e:
        logger.warning(f"配置文件读取失败，使用默认值: {e}")
    return cfg


def save_config(cfg: Dict[str, Any], path: Optional[str] = None) -> None:
    """
    写入 JSON 配置，文件权限设为 0600（仅用户可读写）。
    """
    path = path or CONFIG_FILE
    try:
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(cfg, f, ensure_ascii=False, indent=2, sort_keys=True)
        os.chmod(path, 0o600)
        logger.info(f"配置已保存到 {path}")
    except OSError as e:
        logger.error(f"配置保存失败: {e}")
        raise


def merge_env_into_config(cfg: Dict[str, Any], saved_keys=()) -> Dict[str, Any]:
    """
    将 env 变量作为底层回退合并进配置：JSON 里显式保存过的键不覆盖。
    env 值无法解析为整数时忽略并告警。
    """
    for cfg_key, env_var in ENV_MAP.items():
        env_val = os.getenv(env_var, '')
        if not env_val or cfg_key in saved_keys:
            continue
        try:
            cfg[cfg_key] = int(env_val)
        except ValueError:
            logger.warning(f"忽略无效的环境变量 {env_var}={env_val!r}")
    return cfg


def resolve_config(overrides: Optional[Dict[str, Any]] = None,
                   path: Optional[str] = None) -> Dict[str, Any]:
    """
    按优先级合成最终配置：overrides (CLI) > JSON > env > 默认值。
    overrides 中值为 None 的键视为未指定。
    """
    path = path or CONFIG_FILE
    saved_keys = ()
    if os.path.exists(path):
        try:
            with open(path, 'r', encoding='utf-8') as f:
                saved = json.load(f)
            if isinstance(saved, dict):
                saved_keys = tuple(saved.keys())
        except (json.JSONDecodeError, OSError):
            saved_keys = ()
    cfg = merge_env_into_config(load_config(path), saved_keys=saved_keys)
    for key, value in (overrides or {}).items():
        if value is not None:
            cfg[key] = value
    return cfg
