"""Ordered fan-out of independent work items over a thread pool."""

from __future__ import annotations

import logging
import os
from collections.abc import Callable, Iterable
from concurrent.futures import ThreadPoolExecutor
from typing import TypeVar

from rydberg_mtp.errors import raise_config_error

LOGGER = logging.getLogger(__name__)

THREADS_ENV = "RYDBERG_MTP_THREADS"

T = TypeVar("T")
R = TypeVar("R")


def resolve_threads(configured: int | None = None) -> int:
    """Pick the worker count: explicit setting, then environment, then CPUs."""
    if configured is not None:
        threads = configured
    elif (raw := os.environ.get(THREADS_ENV)) is not None:
        try:
            threads = int(raw)
        except ValueError:
            raise_config_error(
                "InvalidParameter", f"{THREADS_ENV} must be an integer", raw
            )
    else:
        threads = os.cpu_count() or 1
    if threads < 1:
        raise_config_error("InvalidParameter", "thread count must be positive", threads)
    return threads


def ordered_map(fn: Callable[[T], R], items: Iterable[T], threads: int = 1) -> list[R]:
    """Apply ``fn`` to every item and return results in input order.

    Each result depends only on its own item, so outputs do not depend on
    ``threads``. With one thread the items run inline.
    """
    work = list(items)
    if threads <= 1 or len(work) <= 1:
        return [fn(item) for item in work]
    LOGGER.debug("dispatching %d items on %d threads", len(work), threads)
    with ThreadPoolExecutor(max_workers=min(threads, len(work))) as executor:
        return list(executor.map(fn, work))
