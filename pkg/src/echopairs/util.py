"""Shared helpers: reproducible RNG substreams and a tiny parallel map."""
from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")
R = TypeVar("R")


def seed_material(*parts: object) -> int:
    """Stable 128-bit seed derived from the given parts.

    Uses sha256 rather than hash() so substreams do not depend on
    PYTHONHASHSEED or the process.
    """
    text = "\x1f".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:16], "big")


def derived_rng(*parts: object) -> np.random.Generator:
    return np.random.default_rng(seed_material(*parts))


def pmap(fn: Callable[[T], R], items: Sequence[T], threads: int = 1) -> list[R]:
    """Order-preserving map, optionally over a thread pool.

    Results are identical for any thread count as long as ``fn`` is pure;
    callers rely on that for reproducible output.
    """
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
