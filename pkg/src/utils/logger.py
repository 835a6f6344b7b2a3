"""
日志配置模块
"""
import logging

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

logger = logging.getLogger(__name__)


def setup_logging(level: str = 'INFO') -> None:
    """配置根日志（命令行与界面入口调用一次）"""
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format=LOG_FORMAT,
    )
    # flet 的调试输出太多
    logging.getLogger('flet').setLevel(logging.WARNING)
    logging.getLogger('flet_core').setLevel(logging.WARNING)
