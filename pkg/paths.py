"""
运行时数据路径解析。
L1B_DATA_DIR 指定时写到该目录；否则写到仓库根目录。
"""
import os

APP_NAME = "l1_basis"


def _ensure_dir(path: str) -> str:
    """目录不存在则创建。"""
    os.makedirs(path, exist_ok=True)
    return path


_override = os.getenv("L1B_DATA_DIR", "")
if _override:
    data_dir = _ensure_dir(os.path.expanduser(_override))
else:
    # 开发时：仓库根目录
    data_dir = os.path.dirname(os.path.abspath(__file__))

log_path = os.path.join(data_dir, "l1_basis.log")
config_path = os.path.expanduser(os.getenv("L1B_CONFIG", "~/.l1_basis_config.json"))
