"""
日志配置
"""
import sys

from loguru import logger

LOG_FORMAT = (
    "<green>{time:YYYY-MM-DD HH:mm:ss}</green> | "
    "<level>{level: <8}</level> | "
    "<cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> - "
    "<level>{message}</level>"
)


def setup_logging(level: str = "INFO") -> None:
    """配置 loguru 输出到 stderr，stdout 留给计算结果"""
    logger.remove()
    logger.add(sys.stderr, format=LOG_FORMAT, level=level.upper())
