"""Thread pool helpers for per-mode and per-axis work."""

import logging
import os

from concurrent.futures import ThreadPoolExecutor
from typing import Callable
from typing import Iterable
from typing import List
from typing import Optional
from typing import TypeVar

from ..config.constants import THREADS_ENV_VAR
from ..exceptions import SchemaError


logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def resolve_threads(requested: Optional[int] = None) -> int:
    """Thread count from the flag, then ``DEPHASIM_THREADS``, then 1."""
    if requested is None:
        raw = os.getenv(THREADS_ENV_VAR)
        if raw is None or raw.strip() == "":
            return 1
        try:
            requested = int(raw)
        except ValueError as e:
            raise SchemaError(
                f"{THREADS_ENV_VAR} must be an integer, got {raw!r}",
                details={"field": THREADS_ENV_VAR},
            ) from e
    if requested < 1:
        raise SchemaError(
            f"thread count must be >= 1, got {requested}",
            details={"field": "threads"},
        )
    return requested


def ordered_map(fn: Callable[[T], R], items: Iterable[T], threads: int = 1) -> List[R]:
    """Maps ``fn`` over ``items``; results always come back in input order."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]

    workers = min(threads, len(items))
    logger.debug(f"Distribuindo {len(items)} tarefas em {workers} threads")
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
