"""
进程入口：配置日志后把参数交给 cli.run。
报告写 stdout，日志写 stderr 和 l1_basis.log。
"""
import sys
import logging

try:
    from . import cli
    from .paths import log_path as _LOG_PATH
except ImportError:
    import cli
    from paths import log_path as _LOG_PATH

# Setup logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(levelname)s - %(message)s',
    handlers=[
        logging.StreamHandler(sys.stderr),
        logging.FileHandler(_LOG_PATH, encoding='utf-8')
    ]
)
logger = logging.getLogger(__name__)


def main() -> int:
    try:
        return cli.run(sys.argv[1:])
    except KeyboardInterrupt:
        logger.info("用户中断。")
        return 130


if __name__ == "__main__":
    sys.exit(main())
