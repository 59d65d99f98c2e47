"""
校验 worker 实现

- run_check 是可被进程池序列化调用的顶层函数，返回 CheckReport 的 dict 形式
"""
from __future__ import annotations

from typing import Any, Dict

from loguru import logger

from app.core.logging import setup_logging


def init_worker(level: str) -> None:
    """进程池子进程的初始化：沿用主进程的日志级别"""
    setup_logging(level)


def run_check(name: str, order: int) -> Dict[str, Any]:
    """执行一项具名检查。"""
    from app.services.verification import verification_service

    try:
        return verification_service.run(name, order).model_dump()
    except Exception as e:
        logger.error(f"检查 {name} 执行失败 order={order}: {e}")
        raise
