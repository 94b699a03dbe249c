"""Параллельный map с детерминированным порядком результатов."""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, TypeVar

T = TypeVar("T")
R = TypeVar("R")

logger = logging.getLogger(__name__)


def parallel_map(fn: Callable[[T], R], items: Iterable[T], threads: int = 1) -> List[R]:
    """
    fn по всем items; порядок результатов совпадает с порядком входа.

    threads=1 выполняет всё в текущем потоке. Задачи не делят
    изменяемого состояния, поэтому результат не зависит от расписания.
    """
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    workers = min(threads, len(items))
    logger.debug("parallel_map: %d задач на %d потоках", len(items), workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
