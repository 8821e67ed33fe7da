#!/usr/bin/env python3
"""
执行指标 📊

记录单次操作的耗时与内存占用，供 CLI 的 --json 输出与调试日志使用。
"""

import logging
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Dict, Iterator, Optional

import psutil

logger = logging.getLogger(__name__)


@dataclass
class ExecutionMetrics:
    """执行指标"""
    task: str
    start_time: float = field(default_factory=time.perf_counter)
    end_time: Optional[float] = None
    duration: float = 0.0
    success: bool = False
    rss_mb: float = 0.0
    counters: Dict[str, int] = field(default_factory=dict)

    def finalize(self, success: bool):
        """完成记录"""
        self.end_time = time.perf_counter()
        self.duration = self.end_time - self.start_time
        self.success = success
        try:
            self.rss_mb = psutil.Process().memory_info().rss / (1024 * 1024)
        except psutil.Error:
            self.rss_mb = 0.0

    @property
    def elapsed_ms(self) -> int:
        return int(round(self.duration * 1000))

    def bump(self, name: str, amount: int = 1):
        self.counters[name] = self.counters.get(name, 0) + amount


@contextmanager
def track(task: str) -> Iterator[ExecutionMetrics]:
    """追踪一个代码块的执行指标"""
    metrics = ExecutionMetrics(task=task)
    ok = False
    try:
        yield metrics
        ok = True
    finally:
        metrics.finalize(ok)
        logger.debug(
            f"[Metrics] {task}: {metrics.elapsed_ms} ms, rss={metrics.rss_mb:.1f} MB, "
            f"counters={metrics.counters}"
        )
