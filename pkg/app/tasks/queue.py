"""
校验套件执行器（asyncio 编排）

- max_workers <= 1 时在当前进程内逐项执行
- 否则通过 run_in_executor 分发到 ProcessPoolExecutor，结果按注册顺序返回
"""
from __future__ import annotations

import asyncio
from concurrent.futures import ProcessPoolExecutor
from typing import List, Optional, Sequence

from loguru import logger

from app.core.config import settings
from app.models.payload import CheckReport
from app.tasks.worker import init_worker, run_check


class SuiteRunner:
    """校验套件统一入口。

    进程池在 start() 时创建、stop() 时关闭；也可用 async with 管理生命周期。
    """

    def __init__(self, max_workers: Optional[int] = None, log_level: Optional[str] = None) -> None:
        self.max_workers = max_workers if max_workers is not None else settings.max_workers
        self.log_level = log_level or settings.log_level
        self._pool: Optional[ProcessPoolExecutor] = None

    @property
    def parallel(self) -> bool:
        return self.max_workers > 1

    async def start(self) -> None:
        if self.parallel and self._pool is None:
            self._pool = ProcessPoolExecutor(
                max_workers=self.max_workers,
                initializer=init_worker,
                initargs=(self.log_level,),
            )
            logger.info(f"进程池已启动，workers={self.max_workers}")

    async def stop(self) -> None:
        if self._pool is not None:
            self._pool.shutdown(wait=True)
            self._pool = None

    async def __aenter__(self) -> "SuiteRunner":
        await self.start()
        return self

    async def __aexit__(self, *exc) -> None:
        await self.stop()

    async def run_one(self, name: str, order: int) -> CheckReport:
        if self._pool is None:
            return CheckReport.model_validate(run_check(name, order))
        loop = asyncio.get_running_loop()
        payload = await loop.run_in_executor(self._pool, run_check, name, order)
        return CheckReport.model_validate(payload)

    async def run(self, names: Sequence[str], order: int) -> List[CheckReport]:
        """按给定顺序返回报告；任一检查抛出的异常原样向上传播"""
        logger.info(f"执行 {len(names)} 项检查，order={order}，workers={self.max_workers}")
        if self._pool is None:
            return [await self.run_one(name, order) for name in names]
        return list(await asyncio.gather(*(self.run_one(name, order) for name in names)))


async def run_suite(names: Sequence[str], order: int, max_workers: Optional[int] = None) -> List[CheckReport]:
    async with SuiteRunner(max_workers) as runner:
        return await runner.run(names, order)
